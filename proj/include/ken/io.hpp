#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ken/embedding_set.hpp"
#include "ken/errors.hpp"

namespace ken {

namespace detail {

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw io_error("read failure on '" + path + "'");
  return bytes;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view token, double& out) {
  token = trim(token);
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Shortest representation that round-trips back to the same double.
inline void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline std::uint64_t load_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline std::uint32_t load_u32le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline void store_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

inline void store_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

}  // namespace detail

// CSV of one embedding vector per row. A header row is skipped iff the first
// cell of the first row does not parse as a number. Every data row must have
// the same field count as the first one; errors name the offending line.
inline EmbeddingSet load_csv(const std::string& path, std::string label = {}) {
  const std::string bytes = detail::read_file_bytes(path);
  if (label.empty()) label = path;

  struct Line {
    std::string_view text;
    std::size_t number;  // 1-based position in the file
  };
  std::vector<Line> lines;
  {
    std::size_t start = 0, lineno = 1;
    for (std::size_t i = 0; i <= bytes.size(); ++i) {
      if (i == bytes.size() || bytes[i] == '\n') {
        std::string_view text(bytes.data() + start, i - start);
        if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
        lines.push_back({text, lineno++});
        start = i + 1;
      }
    }
    while (!lines.empty() && detail::trim(lines.back().text).empty())
      lines.pop_back();
  }
  for (const Line& line : lines)
    if (detail::trim(line.text).empty())
      throw format_error(path + ": blank line " + std::to_string(line.number));
  if (lines.empty()) throw format_error(path + ": no data rows");

  auto split = [](std::string_view text) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == ',') {
        fields.push_back(text.substr(start, i - start));
        start = i + 1;
      }
    }
    return fields;
  };

  std::size_t first_data = 0;
  {
    double probe;
    auto fields = split(lines[0].text);
    if (!detail::parse_double(fields[0], probe)) first_data = 1;
  }
  if (first_data >= lines.size()) throw format_error(path + ": no data rows");

  const std::size_t dim = split(lines[first_data].text).size();
  const std::size_t rows = lines.size() - first_data;
  Eigen::MatrixXd vectors(rows, dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const Line& line = lines[first_data + r];
    auto fields = split(line.text);
    if (fields.size() != dim)
      throw format_error(path + ": line " + std::to_string(line.number) +
                         " has " + std::to_string(fields.size()) +
                         " fields, expected " + std::to_string(dim));
    for (std::size_t c = 0; c < dim; ++c) {
      double v;
      if (!detail::parse_double(fields[c], v))
        throw format_error(path + ": line " + std::to_string(line.number) +
                           ", field " + std::to_string(c + 1) +
                           ": not a number");
      if (!std::isfinite(v))
        throw format_error(path + ": line " + std::to_string(line.number) +
                           ", field " + std::to_string(c + 1) +
                           ": non-finite value");
      vectors(Eigen::Index(r), Eigen::Index(c)) = v;
    }
  }
  return make_embedding_set(std::move(vectors), std::move(label));
}

inline void write_csv(const std::string& path, const EmbeddingSet& set) {
  std::string out;
  out.reserve(std::size_t(set.count()) * std::size_t(set.dim()) * 12);
  for (Eigen::Index r = 0; r < set.count(); ++r) {
    for (Eigen::Index c = 0; c < set.dim(); ++c) {
      if (c) out.push_back(',');
      detail::append_double(out, set.vectors(r, c));
    }
    out.push_back('\n');
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f.write(out.data(), std::streamsize(out.size()));
  if (!f) throw io_error("write failure on '" + path + "'");
}

// Binary layout: "KENF", u32le dim, u64le count, then count*dim f64le values
// in row-major order. File length must match exactly.
inline EmbeddingSet load_binary(const std::string& path,
                                std::string label = {}) {
  const std::string bytes = detail::read_file_bytes(path);
  if (label.empty()) label = path;
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "KENF", 4) != 0)
    throw format_error(path + ": missing KENF header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t dim = detail::load_u32le(p + 4);
  const std::uint64_t count = detail::load_u64le(p + 8);
  if (dim == 0 || count == 0)
    throw format_error(path + ": empty embedding set");
  if (count > (std::uint64_t(-1) - 16) / 8 / dim)
    throw format_error(path + ": header count/dim overflow");
  const std::uint64_t expected = 16 + 8 * count * dim;
  if (bytes.size() != expected)
    throw format_error(path + ": length " + std::to_string(bytes.size()) +
                       " does not match header (expected " +
                       std::to_string(expected) + ")");
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  const unsigned char* q = p + 16;
  for (std::uint64_t r = 0; r < count; ++r)
    for (std::uint32_t c = 0; c < dim; ++c, q += 8)
      vectors(Eigen::Index(r), Eigen::Index(c)) =
          std::bit_cast<double>(detail::load_u64le(q));
  if (!vectors.allFinite())
    throw format_error(path + ": non-finite value in payload");
  return make_embedding_set(std::move(vectors), std::move(label));
}

inline void write_binary(const std::string& path, const EmbeddingSet& set) {
  std::string out;
  out.reserve(16 + std::size_t(set.count()) * std::size_t(set.dim()) * 8);
  out.append("KENF", 4);
  detail::store_u32le(out, std::uint32_t(set.dim()));
  detail::store_u64le(out, std::uint64_t(set.count()));
  for (Eigen::Index r = 0; r < set.count(); ++r)
    for (Eigen::Index c = 0; c < set.dim(); ++c)
      detail::store_u64le(out, std::bit_cast<std::uint64_t>(set.vectors(r, c)));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f.write(out.data(), std::streamsize(out.size()));
  if (!f) throw io_error("write failure on '" + path + "'");
}

}  // namespace ken
