#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "got/error.hpp"
#include "got/matrix.hpp"

namespace got::io {

namespace detail {

inline const char* b64_alphabet() {
  return "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

inline std::string b64_encode(const unsigned char* data, size_t len) {
  const char* tbl = b64_alphabet();
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 2 < len; i += 3) {
    const uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(tbl[(v >> 6) & 63]);
    out.push_back(tbl[v & 63]);
  }
  if (i < len) {
    uint32_t v = data[i] << 16;
    if (i + 1 < len) v |= data[i + 1] << 8;
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(i + 1 < len ? tbl[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

inline std::vector<unsigned char> b64_decode(const std::string& s) {
  std::vector<int> rev(256, -1);
  const char* tbl = b64_alphabet();
  for (int i = 0; i < 64; ++i) rev[static_cast<unsigned char>(tbl[i])] = i;
  std::vector<unsigned char> out;
  uint32_t acc = 0;
  int bits = 0;
  for (char c : s) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = rev[static_cast<unsigned char>(c)];
    if (v < 0) throw IoError("base64: invalid character in payload");
    acc = (acc << 6) | static_cast<uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace detail

/// Tensor file: JSON {"rows", "cols", "dtype": "f32"|"f64", "data": base64 of
/// the row-major little-endian payload}.
template <typename T>
nlohmann::json tensor_to_json(const Matrix<T>& m) {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["dtype"] = std::is_same_v<T, float> ? "f32" : "f64";
  j["data"] = detail::b64_encode(reinterpret_cast<const unsigned char*>(m.data()),
                                 m.size() * sizeof(T));
  return j;
}

template <typename T>
Matrix<T> tensor_from_json(const nlohmann::json& j) {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  for (const char* key : {"rows", "cols", "dtype", "data"})
    if (!j.contains(key)) throw SchemaError(std::string("tensor json: missing field \"") + key + "\"");
  const int rows = j["rows"].get<int>();
  const int cols = j["cols"].get<int>();
  if (rows < 0 || cols < 0) throw SchemaError("tensor json: negative shape");
  const std::string dtype = j["dtype"].get<std::string>();
  const auto payload = detail::b64_decode(j["data"].get<std::string>());
  Matrix<T> m(rows, cols);
  const size_t n = static_cast<size_t>(rows) * cols;
  if (dtype == "f64") {
    if (payload.size() != n * sizeof(double))
      throw SchemaError("tensor json: payload is " + std::to_string(payload.size()) +
                        " bytes, expected " + std::to_string(n * sizeof(double)));
    for (size_t k = 0; k < n; ++k) {
      double v;
      std::memcpy(&v, payload.data() + k * sizeof(double), sizeof(double));
      m[k] = static_cast<T>(v);
    }
  } else if (dtype == "f32") {
    if (payload.size() != n * sizeof(float))
      throw SchemaError("tensor json: payload is " + std::to_string(payload.size()) +
                        " bytes, expected " + std::to_string(n * sizeof(float)));
    for (size_t k = 0; k < n; ++k) {
      float v;
      std::memcpy(&v, payload.data() + k * sizeof(float), sizeof(float));
      m[k] = static_cast<T>(v);
    }
  } else {
    throw SchemaError("tensor json: dtype must be f32 or f64, got \"" + dtype + "\"");
  }
  return m;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
}

template <typename T>
void save_tensor(const std::string& path, const Matrix<T>& m) {
  write_file(path, tensor_to_json(m).dump(2) + "\n");
}

template <typename T>
Matrix<T> load_tensor(const std::string& path) {
  return tensor_from_json<T>(nlohmann::json::parse(read_file(path)));
}

}  // namespace got::io
