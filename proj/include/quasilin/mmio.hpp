#pragma once

#include "quasilin/types.hpp"

#include <iosfwd>
#include <string>

namespace quasilin::mmio {

// Dense Matrix Market "array" storage, real field. General layout stores all
// entries column-major; Symmetric stores the lower triangle of a square matrix.
enum class Layout { General, Symmetric };

// Parses an array-format real matrix (general or symmetric). Throws IoError on
// malformed input; `context` names the source in error messages.
Mat read(std::istream& in, const std::string& context = "<stream>");
Mat read_file(const std::string& path);

// Writes with 17 significant digits so a write-then-read round trip is
// bit-exact. Symmetric layout requires the entries to be exactly symmetric.
void write(std::ostream& out, const Mat& X, Layout layout = Layout::General);

// Writes to a temporary file in the same directory and renames it into place,
// so readers never observe a partially written file.
void write_file(const std::string& path, const Mat& X, Layout layout = Layout::General);

}  // namespace quasilin::mmio
