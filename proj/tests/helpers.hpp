#ifndef VIDEC_TESTS_HELPERS_HPP
#define VIDEC_TESTS_HELPERS_HPP

#include <filesystem>
#include <unistd.h>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "videc/dataset.hpp"
#include "videc/random.hpp"

namespace videc::test {

/// Scratch directory removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string &tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("videc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &s) const { return path_ / s; }

private:
  std::filesystem::path path_;
};

inline std::vector<std::string> channel_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back("ch" + std::to_string(i));
  return out;
}

/// Gaussian epoch set with balanced labels class_0..class_{K-1}.
inline EpochSet random_epochs(std::size_t trials, std::size_t channels, std::size_t samples, std::size_t K,
                              std::uint64_t seed, double fs = 256.0, double t0 = 0.0) {
  auto rng = make_rng(seed, {1});
  std::normal_distribution<double> normal;
  std::vector<double> data(trials * channels * samples);
  for (auto &v : data)
    v = normal(rng);
  std::vector<std::string> classes, labels;
  for (std::size_t k = 0; k < K; ++k)
    classes.push_back("class_" + std::to_string(k));
  for (std::size_t t = 0; t < trials; ++t)
    labels.push_back(classes[t % K]);
  return EpochSet(std::move(data), {trials, channels, samples}, fs, t0, labels, channel_labels(channels), classes);
}

/// Random SPD matrix with condition number roughly bounded by `spread`.
inline Eigen::MatrixXd random_spd(Eigen::Index d, std::mt19937_64 &rng, double spread = 10.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(1.0, spread);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd ev(d);
  for (Eigen::Index i = 0; i < d; ++i)
    ev(i) = u(rng);
  Eigen::MatrixXd s = q * ev.asDiagonal() * q.transpose();
  return (s + s.transpose()) / 2.0;
}

} // namespace videc::test

#endif // VIDEC_TESTS_HELPERS_HPP
