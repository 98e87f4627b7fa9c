#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fieldsim/sim/event.hpp"

namespace fieldsim::sim {

struct EventTrace {
  std::vector<Event> events;
  SimTime terminal_time;
  std::uint64_t seed = 0;
  std::string scenario_hash;

  bool is_sorted() const;

  // One JSON object per line: {"id","time_us","node_id","kind","payload"}.
  std::string to_jsonl() const;
  void write_jsonl(std::ostream& out) const;
  // FNV-1a over to_jsonl(), as 16 lowercase hex digits.
  std::string hash() const;
};

std::string event_to_json_line(const Event& e);
Event event_from_json_line(std::string_view line);
std::vector<Event> read_trace_jsonl(std::istream& in);

// FNV-1a 64 digest of arbitrary bytes, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace fieldsim::sim
