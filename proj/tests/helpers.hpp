#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <string>

#include "ken.hpp"

namespace test {

inline ken::EmbeddingSet random_set(Eigen::Index count, Eigen::Index dim,
                                    std::uint64_t seed,
                                    const std::string& label = {}) {
  ken::Rng rng(seed);
  Eigen::MatrixXd vectors(count, dim);
  for (Eigen::Index i = 0; i < count; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) vectors(i, j) = rng.gaussian();
  return ken::make_embedding_set(std::move(vectors), label);
}

// Unique scratch file removed at scope exit.
class temp_file {
 public:
  explicit temp_file(const std::string& stem) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             (stem + "." + std::to_string(++counter) + "." +
              std::to_string(::getpid())))
                .string();
  }
  temp_file(const temp_file&) = delete;
  temp_file& operator=(const temp_file&) = delete;
  ~temp_file() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace test
