#include "geoaff/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "geoaff/errors.hpp"

namespace geoaff {

namespace {

void append_double(double d, std::string& out) {
  if (std::isnan(d)) {
    out += "\"nan\"";
    return;
  }
  if (std::isinf(d)) {
    out += d > 0 ? "\"inf\"" : "\"-inf\"";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", d);
  out += buf;
}

void append_string(const std::string& s, std::string& out) {
  // Reuse nlohmann's escaping by dumping a transient string value.
  out += nlohmann::json(s).dump();
}

void emit(const nlohmann::ordered_json& v, std::string& out, int indent,
          int depth) {
  const bool pretty = indent > 0;
  auto newline_pad = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(std::size_t(indent) * d, ' ');
  };
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::null:
      out += "null";
      break;
    case nlohmann::ordered_json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case nlohmann::ordered_json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case nlohmann::ordered_json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case nlohmann::ordered_json::value_t::number_float:
      append_double(v.get<double>(), out);
      break;
    case nlohmann::ordered_json::value_t::string:
      append_string(v.get<std::string>(), out);
      break;
    case nlohmann::ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        break;
      }
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        newline_pad(depth + 1);
        emit(item, out, indent, depth + 1);
      }
      newline_pad(depth);
      out += ']';
      break;
    }
    case nlohmann::ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline_pad(depth + 1);
        append_string(it.key(), out);
        out += pretty ? ": " : ":";
        emit(it.value(), out, indent, depth + 1);
      }
      newline_pad(depth);
      out += '}';
      break;
    }
    default:
      out += "null";
      break;
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& v, int indent) {
  std::string out;
  emit(v, out, indent, 0);
  if (indent > 0) out += '\n';
  return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace geoaff
