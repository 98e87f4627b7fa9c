#include "fieldsim/json_util.hpp"

#include <fstream>
#include <sstream>

namespace fieldsim::json_util {

nlohmann::json parse_text(std::string_view text, std::string_view source_name) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Translate the byte offset into line:column for humans.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigInvalid("", std::string(source_name) + ":" + std::to_string(line) + ":" +
                                std::to_string(col) + ": malformed JSON");
  }
}

nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

}  // namespace fieldsim::json_util
