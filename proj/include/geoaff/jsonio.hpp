#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace geoaff {

// Deterministic JSON serializer used for every artifact this library writes.
// Differences from nlohmann's dump():
//   - finite doubles are rendered as %.16e (17 significant digits), so no
//     numeric output ever loses precision to shortest-round-trip printing;
//   - non-finite doubles become the strings "inf" / "-inf" / "nan" (JSON has
//     no literal for them; used e.g. by the VIF infinity marker);
//   - object keys keep insertion order (use nlohmann::ordered_json).
// indent <= 0 emits compact single-line JSON.
std::string dump_json(const nlohmann::ordered_json& v, int indent = 0);

// Writes content to path, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Reads a whole file, throwing IoError if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace geoaff
