#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace ct {

/// Shortest form is not used: doubles are always printed with 17 significant digits.
std::string format_double(double value);

/// Serializes with sorted keys (nlohmann's default object ordering), two-space
/// indentation and every float printed via format_double. Non-finite floats become null.
std::string dump_canonical(const nlohmann::json& value);

/// Whole-file byte I/O. Throws Error(IoError).
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// 64-bit FNV-1a digest rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace ct
