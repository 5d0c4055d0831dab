#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mim::text {

// Lowercases, splits on whitespace, and breaks ASCII punctuation out into
// standalone tokens. Bytes >= 0x80 are passed through untouched.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace mim::text
