#include "bluff/config_text.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bluff {
namespace {

std::string Trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

nlohmann::json ParseConfigText(const std::string& text) {
  const std::string trimmed = Trim(text);
  if (!trimmed.empty() && trimmed.front() == '{') {
    nlohmann::json j = nlohmann::json::parse(trimmed);
    return j;
  }
  nlohmann::json settings = nlohmann::json::object();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    settings[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return settings;
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int64_t ConfigInt(const nlohmann::json& value) {
  if (!value.is_string()) return value.get<int64_t>();
  const std::string s = value.get<std::string>();
  size_t used = 0;
  const int64_t v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer: " + s);
  return v;
}

double ConfigDouble(const nlohmann::json& value) {
  if (!value.is_string()) return value.get<double>();
  const std::string s = value.get<std::string>();
  size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: " + s);
  return v;
}

bool ConfigBool(const nlohmann::json& value) {
  if (value.is_boolean()) return value.get<bool>();
  const std::string s = value.get<std::string>();
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("not a boolean: " + s);
}

}  // namespace bluff
