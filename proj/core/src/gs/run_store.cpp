#include "fieldsim/gs/run_store.hpp"

#include <fstream>
#include <unistd.h>

#include "fieldsim/errors.hpp"

namespace fieldsim::gs {

namespace fs = std::filesystem;

nlohmann::json to_json(const StoredRecord& r) {
  nlohmann::json j = {{"seq", r.seq}, {"message", r.message}};
  if (!r.flags.empty()) j["flags"] = r.flags;
  return j;
}

StoredRecord stored_record_from_json(const nlohmann::json& j) {
  StoredRecord r;
  r.seq = j.at("seq").get<std::uint64_t>();
  r.message = j.at("message");
  if (auto it = j.find("flags"); it != j.end()) r.flags = it->get<std::vector<std::string>>();
  return r;
}

RunStore::RunStore(fs::path dir, std::string run_id, nlohmann::json meta)
    : dir_(std::move(dir)), run_id_(std::move(run_id)), meta_(std::move(meta)) {}

void RunStore::open_for_append() {
  const auto path = dir_ / "records.jsonl";
  file_.reset(std::fopen(path.c_str(), "ab"));
  if (!file_) throw IoFailure("cannot open " + path.string() + " for append");
}

RunStore RunStore::create(const fs::path& root, const std::string& run_id, nlohmann::json meta) {
  const auto dir = root / run_id;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (fs::exists(dir)) throw IoFailure("run directory already exists: " + dir.string());
  if (!fs::create_directory(dir, ec) || ec) throw IoFailure("cannot create " + dir.string());
  meta["run_id"] = run_id;
  {
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
    if (!out) throw IoFailure("cannot write " + (dir / "meta.json").string());
  }
  RunStore store(dir, run_id, std::move(meta));
  store.open_for_append();
  return store;
}

RunStore RunStore::open(const fs::path& root, const std::string& run_id) {
  const auto dir = root / run_id;
  if (run_id.empty() || !fs::is_directory(dir)) throw UnknownRun("unknown run: " + run_id);
  nlohmann::json meta = nlohmann::json::object();
  if (std::ifstream in(dir / "meta.json"); in) {
    try {
      meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
      throw IoFailure("corrupt meta.json in " + dir.string());
    }
  }
  RunStore store(dir, run_id, std::move(meta));

  const auto path = dir / "records.jsonl";
  std::uintmax_t good_bytes = 0;
  if (std::ifstream in(path, std::ios::binary); in) {
    std::string line;
    std::uintmax_t offset = 0;
    while (std::getline(in, line)) {
      const bool terminated = !in.eof();
      if (!terminated) break;
      offset += line.size() + 1;
      StoredRecord r;
      try {
        r = stored_record_from_json(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception&) {
        throw IoFailure(path.string() + ": corrupt record after seq " + std::to_string(store.last_seq()));
      }
      if (r.seq != store.last_seq() + 1) {
        throw IoFailure(path.string() + ": sequence gap at " + std::to_string(r.seq));
      }
      store.records_.push_back(std::move(r));
      good_bytes = offset;
    }
  }
  if (fs::exists(path) && fs::file_size(path) != good_bytes) fs::resize_file(path, good_bytes);
  store.open_for_append();
  return store;
}

std::uint64_t RunStore::append(nlohmann::json message, std::vector<std::string> flags) {
  StoredRecord r{last_seq() + 1, std::move(message), std::move(flags)};
  const auto line = to_json(r).dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_.get()) != line.size()) {
    throw IoFailure("write failed for run " + run_id_);
  }
  flush();
  records_.push_back(std::move(r));
  return records_.back().seq;
}

void RunStore::flush() {
  if (!file_) return;
  if (std::fflush(file_.get()) != 0 || ::fsync(fileno(file_.get())) != 0) {
    throw IoFailure("flush failed for run " + run_id_);
  }
}

}  // namespace fieldsim::gs
