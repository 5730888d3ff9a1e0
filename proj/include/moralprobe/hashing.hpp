#pragma once

#include <string>
#include <string_view>

namespace moralprobe {

// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// Key under which a text score is cached: SHA-256 over model id and the exact
// text, separated by a NUL byte so ("ab","c") and ("a","bc") differ.
std::string score_key(std::string_view model_id, std::string_view text);

} // namespace moralprobe
