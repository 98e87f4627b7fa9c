#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fieldsim::gs {

struct StoredRecord {
  std::uint64_t seq = 0;
  // Wire message, including its "type".
  nlohmann::json message;
  // Service-side annotations, e.g. ["ts_out_of_order"].
  std::vector<std::string> flags;
};

nlohmann::json to_json(const StoredRecord& r);
StoredRecord stored_record_from_json(const nlohmann::json& j);

// Append-only per-run log at <root>/<run_id>/records.jsonl plus meta.json.
// Each append is flushed and fsync'd before returning. Not thread-safe; the
// owning GroundStation serializes access.
class RunStore {
 public:
  // Throws IoFailure if the run directory already exists or cannot be made.
  static RunStore create(const std::filesystem::path& root, const std::string& run_id,
                         nlohmann::json meta);
  // Replays an existing run. UnknownRun when absent; IoFailure when the log
  // has a gap. A torn final line (crash mid-write) is discarded.
  static RunStore open(const std::filesystem::path& root, const std::string& run_id);

  RunStore(RunStore&&) noexcept = default;
  RunStore& operator=(RunStore&&) noexcept = default;

  std::uint64_t append(nlohmann::json message, std::vector<std::string> flags = {});
  void flush();

  const std::string& run_id() const { return run_id_; }
  const nlohmann::json& meta() const { return meta_; }
  const std::vector<StoredRecord>& records() const { return records_; }
  std::uint64_t last_seq() const { return records_.empty() ? 0 : records_.back().seq; }
  std::filesystem::path dir() const { return dir_; }

 private:
  struct FileCloser {
    void operator()(std::FILE* f) const {
      if (f) std::fclose(f);
    }
  };

  RunStore(std::filesystem::path dir, std::string run_id, nlohmann::json meta);
  void open_for_append();

  std::filesystem::path dir_;
  std::string run_id_;
  nlohmann::json meta_;
  std::vector<StoredRecord> records_;
  std::unique_ptr<std::FILE, FileCloser> file_;
};

}  // namespace fieldsim::gs
