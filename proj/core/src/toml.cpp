// Copyright 2026 the fermr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fermr/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fermr::toml {

namespace {

[[noreturn]] void fail(std::int64_t line, const std::string& message) {
  throw std::runtime_error("toml:" + std::to_string(line) + ": " + message);
}

std::string_view strip(std::string_view sv) {
  while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front()))) sv.remove_prefix(1);
  while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.back()))) sv.remove_suffix(1);
  return sv;
}

// Removes a trailing comment, honoring quoted strings.
std::string_view strip_comment(std::string_view sv) {
  bool in_string = false;
  for (std::size_t i = 0; i < sv.size(); ++i) {
    if (sv[i] == '"' && (i == 0 || sv[i - 1] != '\\')) in_string = !in_string;
    if (sv[i] == '#' && !in_string) return sv.substr(0, i);
  }
  return sv;
}

std::string parse_basic_string(std::string_view sv, std::int64_t line) {
  if (sv.size() < 2 || sv.front() != '"' || sv.back() != '"') fail(line, "malformed string");
  std::string out;
  for (std::size_t i = 1; i + 1 < sv.size(); ++i) {
    char c = sv[i];
    if (c == '\\') {
      if (i + 2 >= sv.size() + 1) fail(line, "dangling escape");
      ++i;
      switch (sv[i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(line, std::string("unsupported escape \\") + sv[i]);
      }
    } else {
      out += c;
    }
  }
  return out;
}

Value parse_value(std::string_view sv, std::int64_t line);

Value parse_array(std::string_view sv, std::int64_t line) {
  Array items;
  std::string_view body = sv.substr(1, sv.size() - 2);
  std::size_t start = 0;
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    const bool at_end = i == body.size();
    const char c = at_end ? ',' : body[i];
    if (!at_end && c == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
    if (in_string) continue;
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      const auto piece = strip(body.substr(start, i - start));
      if (!piece.empty()) items.push_back(parse_value(piece, line));
      start = i + 1;
    }
  }
  return Value{std::move(items)};
}

Value parse_value(std::string_view sv, std::int64_t line) {
  sv = strip(sv);
  if (sv.empty()) fail(line, "empty value");
  if (sv.front() == '"') return Value{parse_basic_string(sv, line)};
  if (sv.front() == '[') {
    if (sv.back() != ']') fail(line, "unterminated array");
    return parse_array(sv, line);
  }
  if (sv == "true") return Value{true};
  if (sv == "false") return Value{false};

  const bool looks_float = sv.find_first_of(".eE") != std::string_view::npos &&
                           sv.find_first_not_of("+-0123456789.eE_") == std::string_view::npos;
  std::string cleaned(sv);
  std::erase(cleaned, '_');
  if (!looks_float) {
    std::int64_t iv = 0;
    const auto [p, ec] = std::from_chars(cleaned.data(), cleaned.data() + cleaned.size(), iv);
    if (ec == std::errc{} && p == cleaned.data() + cleaned.size()) return Value{iv};
  }
  try {
    std::size_t consumed = 0;
    const double dv = std::stod(cleaned, &consumed);
    if (consumed == cleaned.size()) return Value{dv};
  } catch (const std::exception&) {
  }
  fail(line, "cannot parse value '" + std::string(sv) + "'");
}

bool valid_key(std::string_view sv) {
  if (sv.empty()) return false;
  for (char c : sv) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') {
      return false;
    }
  }
  return true;
}

}  // namespace

const Value* Table::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

bool Table::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!v->is_bool()) throw std::runtime_error("toml: key '" + key + "' is not a boolean");
  return std::get<bool>(v->data);
}

std::int64_t Table::get_int(const std::string& key, std::int64_t fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!v->is_int()) throw std::runtime_error("toml: key '" + key + "' is not an integer");
  return std::get<std::int64_t>(v->data);
}

double Table::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->is_int()) return static_cast<double>(std::get<std::int64_t>(v->data));
  if (!v->is_float()) throw std::runtime_error("toml: key '" + key + "' is not a number");
  return std::get<double>(v->data);
}

std::string Table::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!v->is_string()) throw std::runtime_error("toml: key '" + key + "' is not a string");
  return std::get<std::string>(v->data);
}

std::vector<double> Table::get_double_array(const std::string& key,
                                            const std::vector<double>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!v->is_array()) throw std::runtime_error("toml: key '" + key + "' is not an array");
  std::vector<double> out;
  for (const Value& item : std::get<Array>(v->data)) {
    if (item.is_int()) {
      out.push_back(static_cast<double>(std::get<std::int64_t>(item.data)));
    } else if (item.is_float()) {
      out.push_back(std::get<double>(item.data));
    } else {
      throw std::runtime_error("toml: key '" + key + "' has a non-numeric element");
    }
  }
  return out;
}

Table parse(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string raw;
  std::string prefix;
  std::int64_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated table header");
      const auto name = strip(line.substr(1, line.size() - 2));
      if (!valid_key(name)) fail(line_no, "bad table name '" + std::string(name) + "'");
      prefix = std::string(name) + ".";
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const auto key = strip(line.substr(0, eq));
    if (!valid_key(key)) fail(line_no, "bad key '" + std::string(key) + "'");
    table.set(prefix + std::string(key), parse_value(line.substr(eq + 1), line_no));
  }
  return table;
}

Table parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace fermr::toml
