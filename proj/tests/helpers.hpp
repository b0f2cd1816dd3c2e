#pragma once

#include <atomic>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "rankseg/npy.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rankseg_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <class T>
std::vector<std::byte> as_bytes(const std::vector<T>& values) {
  std::vector<std::byte> out(values.size() * sizeof(T));
  if (!values.empty()) std::memcpy(out.data(), values.data(), out.size());
  return out;
}

inline void write_f8(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
                     const std::vector<double>& values) {
  rankseg::npy::write(path, rankseg::npy::DType::f8, shape, as_bytes(values));
}

inline void write_f4(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
                     const std::vector<float>& values) {
  rankseg::npy::write(path, rankseg::npy::DType::f4, shape, as_bytes(values));
}

inline void write_u1(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
                     const std::vector<std::uint8_t>& values) {
  rankseg::npy::write(path, rankseg::npy::DType::u1, shape, as_bytes(values));
}

inline std::vector<double> uniform_probs(std::mt19937_64& rng, std::size_t d, double lo = 0.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> p(d);
  for (auto& v : p) v = u(rng);
  return p;
}

}  // namespace testing
