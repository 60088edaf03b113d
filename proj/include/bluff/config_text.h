#ifndef BLUFF_CONFIG_TEXT_H_
#define BLUFF_CONFIG_TEXT_H_

#include <string>

#include <json.hpp>

namespace bluff {

// Parses a configuration file body into a flat JSON object. Accepts either a
// JSON object or `key = value` lines, where '#' starts a comment. Values from
// the line form are kept as strings.
nlohmann::json ParseConfigText(const std::string& text);

// Reads a whole file; throws std::runtime_error naming the path on failure.
std::string ReadTextFile(const std::string& path);

// Value accessors that accept either native JSON values or strings.
int64_t ConfigInt(const nlohmann::json& value);
double ConfigDouble(const nlohmann::json& value);
bool ConfigBool(const nlohmann::json& value);

}  // namespace bluff

#endif  // BLUFF_CONFIG_TEXT_H_
