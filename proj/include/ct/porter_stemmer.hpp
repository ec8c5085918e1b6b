#pragma once

#include <string>
#include <string_view>

namespace ct {

/// Porter (1980) suffix-stripping stemmer for lowercase ASCII words.
/// Follows the reference C implementation, including its departures
/// ("bli" -> "ble", "logi" -> "log", words of length <= 2 left untouched).
std::string porter_stem(std::string_view word);

}  // namespace ct
