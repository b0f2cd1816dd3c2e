#include "rankseg/npy.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rankseg/error.hpp"

namespace rankseg::npy {
namespace {

static_assert(std::endian::native == std::endian::little,
              "NPY I/O assumes a little-endian host");

constexpr std::array<char, 6> kMagic = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

struct DTypeName {
  DType dtype;
  char kind;
  std::size_t size;
};

constexpr std::array<DTypeName, 11> kDTypes = {{
    {DType::f4, 'f', 4},
    {DType::f8, 'f', 8},
    {DType::u1, 'u', 1},
    {DType::u2, 'u', 2},
    {DType::u4, 'u', 4},
    {DType::u8, 'u', 8},
    {DType::i1, 'i', 1},
    {DType::i2, 'i', 2},
    {DType::i4, 'i', 4},
    {DType::i8, 'i', 8},
    {DType::b1, 'b', 1},
}};

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorCode::format, "malformed NPY header: " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

// Returns the raw text of the value following `'key':` in a Python dict literal.
std::string_view dict_value(std::string_view dict, std::string_view key) {
  for (char quote : {'\'', '"'}) {
    std::string needle;
    needle += quote;
    needle += key;
    needle += quote;
    auto pos = dict.find(needle);
    if (pos == std::string_view::npos) continue;
    pos = dict.find(':', pos + needle.size());
    if (pos == std::string_view::npos) fail("missing ':' after " + std::string(key));
    auto rest = trim(dict.substr(pos + 1));
    std::size_t end = 0;
    if (!rest.empty() && rest.front() == '(') {
      end = rest.find(')');
      if (end == std::string_view::npos) fail("unterminated shape tuple");
      return rest.substr(0, end + 1);
    }
    if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
      end = rest.find(rest.front(), 1);
      if (end == std::string_view::npos) fail("unterminated string");
      return rest.substr(0, end + 1);
    }
    end = rest.find_first_of(",}");
    return trim(rest.substr(0, end));
  }
  fail("missing key " + std::string(key));
}

DType parse_descr(std::string_view quoted) {
  if (quoted.size() < 3) fail("bad descr");
  auto text = quoted.substr(1, quoted.size() - 2);
  if (text.size() < 3) fail("bad descr '" + std::string(text) + "'");
  const char order = text[0];
  const char kind = text[1];
  std::size_t size = 0;
  for (char ch : text.substr(2)) {
    if (ch < '0' || ch > '9') fail("bad descr '" + std::string(text) + "'");
    size = size * 10 + static_cast<std::size_t>(ch - '0');
  }
  if (order == '>' && size > 1) {
    throw Error(ErrorCode::dtype, "big-endian arrays are not supported: " + std::string(text));
  }
  if (order != '<' && order != '|' && order != '=' && order != '>') {
    fail("bad byte order in '" + std::string(text) + "'");
  }
  for (const auto& entry : kDTypes) {
    if (entry.kind == kind && entry.size == size) return entry.dtype;
  }
  throw Error(ErrorCode::dtype, "unsupported dtype '" + std::string(text) + "'");
}

std::vector<std::size_t> parse_shape(std::string_view tuple) {
  if (tuple.size() < 2 || tuple.front() != '(' || tuple.back() != ')') fail("bad shape");
  std::vector<std::size_t> shape;
  auto body = tuple.substr(1, tuple.size() - 2);
  while (!body.empty()) {
    auto comma = body.find(',');
    auto token = trim(body.substr(0, comma));
    if (!token.empty()) {
      std::size_t value = 0;
      for (char ch : token) {
        if (ch == 'L') break;  // Python 2 long suffix
        if (ch < '0' || ch > '9') fail("bad shape entry '" + std::string(token) + "'");
        value = value * 10 + static_cast<std::size_t>(ch - '0');
      }
      shape.push_back(value);
    }
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return shape;
}

template <class T>
T load_le(const std::byte* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

}  // namespace

std::size_t item_size(DType dtype) noexcept {
  for (const auto& entry : kDTypes) {
    if (entry.dtype == dtype) return entry.size;
  }
  return 0;
}

bool is_floating(DType dtype) noexcept { return dtype == DType::f4 || dtype == DType::f8; }

std::string descr(DType dtype) {
  for (const auto& entry : kDTypes) {
    if (entry.dtype == dtype) {
      std::string out;
      out += entry.size == 1 ? '|' : '<';
      out += entry.kind;
      out += std::to_string(entry.size);
      return out;
    }
  }
  return "?";
}

std::size_t Array::size() const noexcept {
  std::size_t n = 1;
  for (auto extent : header.shape) n *= extent;
  return n;
}

Header parse_header(std::string_view dict) {
  dict = trim(dict);
  if (dict.empty() || dict.front() != '{') fail("header is not a dict");
  Header header;
  header.dtype = parse_descr(dict_value(dict, "descr"));
  auto fortran = dict_value(dict, "fortran_order");
  if (fortran == "True") {
    throw Error(ErrorCode::format, "Fortran-ordered arrays are not supported");
  }
  if (fortran != "False") fail("bad fortran_order");
  header.shape = parse_shape(dict_value(dict, "shape"));
  return header;
}

Array parse(std::span<const std::byte> bytes) {
  if (bytes.size() < 10 ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    fail("missing magic string");
  }
  const auto major = static_cast<int>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = load_le<std::uint16_t>(bytes.data() + 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) fail("truncated header");
    header_len = load_le<std::uint32_t>(bytes.data() + 8);
    offset = 12;
  } else {
    fail("unsupported version " + std::to_string(major));
  }
  if (bytes.size() < offset + header_len) fail("truncated header");
  std::string_view dict(reinterpret_cast<const char*>(bytes.data() + offset), header_len);

  Array array;
  array.header = parse_header(dict);
  array.header.major_version = major;
  const std::size_t payload = array.size() * item_size(array.header.dtype);
  const std::size_t start = offset + header_len;
  if (bytes.size() - start < payload) {
    throw Error(ErrorCode::format, "NPY payload truncated: expected " +
                                       std::to_string(payload) + " bytes, found " +
                                       std::to_string(bytes.size() - start));
  }
  array.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                    bytes.begin() + static_cast<std::ptrdiff_t>(start + payload));
  return array;
}

Array read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::io, "read failed: " + path.string());
  try {
    return parse(std::as_bytes(std::span(raw)));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::byte> serialize(DType dtype, std::span<const std::size_t> shape,
                                 std::span<const std::byte> payload) {
  std::string dict = "{'descr': '" + descr(dtype) + "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) dict += ',';
    if (i + 1 < shape.size()) dict += ' ';
  }
  dict += "), }";
  // magic(6) + version(2) + len(2) + dict + padding + '\n' is a multiple of 64
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict += '\n';
  if (dict.size() > 0xFFFF) throw Error(ErrorCode::format, "NPY header too long for v1.0");

  std::vector<std::byte> out;
  out.reserve(10 + dict.size() + payload.size());
  for (char ch : kMagic) out.push_back(static_cast<std::byte>(ch));
  out.push_back(std::byte{1});
  out.push_back(std::byte{0});
  const auto len = static_cast<std::uint16_t>(dict.size());
  out.push_back(static_cast<std::byte>(len & 0xFF));
  out.push_back(static_cast<std::byte>(len >> 8));
  for (char ch : dict) out.push_back(static_cast<std::byte>(ch));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

void write(const std::filesystem::path& path, DType dtype, std::span<const std::size_t> shape,
           std::span<const std::byte> payload) {
  const auto bytes = serialize(dtype, shape, payload);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

std::vector<double> to_doubles(const Array& array) {
  const std::size_t n = array.size();
  std::vector<double> out(n);
  const std::byte* src = array.data.data();
  switch (array.header.dtype) {
    case DType::f4:
      for (std::size_t i = 0; i < n; ++i) out[i] = load_le<float>(src + 4 * i);
      break;
    case DType::f8:
      for (std::size_t i = 0; i < n; ++i) out[i] = load_le<double>(src + 8 * i);
      break;
    default:
      throw Error(ErrorCode::dtype, "expected a floating-point array, found " +
                                        descr(array.header.dtype));
  }
  return out;
}

std::vector<std::int64_t> to_integers(const Array& array) {
  const std::size_t n = array.size();
  std::vector<std::int64_t> out(n);
  const std::byte* src = array.data.data();
  auto convert = [&]<class T>(T) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = static_cast<std::int64_t>(load_le<T>(src + sizeof(T) * i));
    }
  };
  switch (array.header.dtype) {
    case DType::u1: convert(std::uint8_t{}); break;
    case DType::b1: convert(std::uint8_t{}); break;
    case DType::u2: convert(std::uint16_t{}); break;
    case DType::u4: convert(std::uint32_t{}); break;
    case DType::u8: convert(std::uint64_t{}); break;
    case DType::i1: convert(std::int8_t{}); break;
    case DType::i2: convert(std::int16_t{}); break;
    case DType::i4: convert(std::int32_t{}); break;
    case DType::i8: convert(std::int64_t{}); break;
    default:
      throw Error(ErrorCode::dtype, "expected an integer array, found " +
                                        descr(array.header.dtype));
  }
  return out;
}

}  // namespace rankseg::npy
