#pragma once

#include <string>
#include <string_view>

namespace mdplab {

// SHA-1 digest as a lowercase hex string.
std::string sha1_hex(std::string_view data);

// Hash of the git blob framing "blob <size>\0<data>"; matches `git hash-object`.
std::string git_blob_hash(std::string_view data);

}  // namespace mdplab
