// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/token_file.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "aim/error.hpp"

namespace aim {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw FormatError(std::string("token file truncated while reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument(std::string("token file: ") + what + " exceeds u32 range");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_tokens(std::ostream& out, const TokenMatrix& tokens) {
  out.write(kTokenFileMagic, 4);
  put_u32(out, kTokenFileVersion);
  put_u32(out, checked_u32(tokens.size(), "N"));
  put_u32(out, checked_u32(tokens.dim(), "D"));
  put_u32(out, checked_u32(tokens.frame_spans().size(), "frame_count"));
  for (const auto& s : tokens.frame_spans()) {
    put_u32(out, checked_u32(s.start, "span start"));
    put_u32(out, checked_u32(s.end, "span end"));
  }
  for (double v : tokens.embeddings().values()) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) throw NonFiniteError("token file: value overflows float32");
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  if (!out) throw Error("token file: write failed");
}

TokenMatrix read_tokens(std::istream& in) {
  char magic[4] = {};
  if (!in.read(magic, 4)) throw FormatError("token file truncated while reading magic");
  if (std::memcmp(magic, kTokenFileMagic, 4) != 0) throw FormatError("token file: bad magic (expected \"AIMT\")");
  const std::uint32_t version = get_u32(in, "version");
  if (version != kTokenFileVersion) {
    throw FormatError("token file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t n = get_u32(in, "N");
  const std::uint32_t d = get_u32(in, "D");
  const std::uint32_t frames = get_u32(in, "frame_count");
  if (frames > n) throw FormatError("token file: more frames than tokens");

  std::vector<FrameSpan> spans(frames);
  std::size_t cursor = 0;
  for (auto& s : spans) {
    s.start = get_u32(in, "span start");
    s.end = get_u32(in, "span end");
    if (s.start != cursor || s.end <= s.start || s.end > n) {
      throw FormatError("token file: frame spans do not partition [0, " + std::to_string(n) + ")");
    }
    cursor = s.end;
  }
  if (cursor != n) throw FormatError("token file: frame spans do not partition [0, " + std::to_string(n) + ")");

  std::vector<double> data(static_cast<std::size_t>(n) * d);
  for (double& v : data) {
    const float f = std::bit_cast<float>(get_u32(in, "embeddings"));
    if (!std::isfinite(f)) throw FormatError("token file: non-finite embedding value");
    v = f;
  }
  return TokenMatrix(Matrix(n, d, std::move(data)), std::move(spans));
}

void write_token_file(const std::string& path, const TokenMatrix& tokens) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open token file for writing: " + path);
  write_tokens(out, tokens);
}

TokenMatrix read_token_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open token file: " + path);
  return read_tokens(in);
}

}  // namespace aim
