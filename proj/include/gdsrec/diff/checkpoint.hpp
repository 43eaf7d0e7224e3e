#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "gdsrec/diff/tape.hpp"

namespace gdsrec::diff {

// Binary parameter checkpoint: a fixed magic header followed by one record
// per parameter (name, rows, cols, row-major raw doubles). Values round-trip
// bit-exactly. Loading validates names, order, and shapes against the
// destination parameters.
void save_parameters(std::ostream& out, std::span<const Parameter* const> params);
void save_parameters(const std::string& path, std::span<const Parameter* const> params);

void load_parameters(std::istream& in, std::span<Parameter* const> params);
void load_parameters(const std::string& path, std::span<Parameter* const> params);

}  // namespace gdsrec::diff
