// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Binary token file, all integers little-endian:
//
//   "AIMT" | version u32 (=1) | N u32 | D u32 | frame_count u32
//   | frame_count x (start u32, end u32) | N*D float32, row-major
//
// Embeddings are stored as IEEE-754 binary32 and widened to double on read.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "aim/tokens.hpp"

namespace aim {

inline constexpr char kTokenFileMagic[4] = {'A', 'I', 'M', 'T'};
inline constexpr std::uint32_t kTokenFileVersion = 1;

void write_tokens(std::ostream& out, const TokenMatrix& tokens);
// Source ids of the result are 0..N-1. Throws FormatError on bad magic,
// unsupported version, truncated payload or spans that do not partition [0, N).
TokenMatrix read_tokens(std::istream& in);

void write_token_file(const std::string& path, const TokenMatrix& tokens);
TokenMatrix read_token_file(const std::string& path);

}  // namespace aim
