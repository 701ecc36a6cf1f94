// core.hpp
// Shared small types: 2d vectors, error hierarchy, a portable seedable RNG,
// and a deterministic fork-join parallel_for.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ep {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 &operator+=(const Vec2 &o) { x += o.x; y += o.y; return *this; }
  Vec2 &operator-=(const Vec2 &o) { x -= o.x; y -= o.y; return *this; }
  Vec2 &operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 &a) { return std::sqrt(dot(a, a)); }

// Error hierarchy. config_error maps to exit code 2 in the CLI, everything
// else to 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct InvalidDomainError : ConfigError {
  using ConfigError::ConfigError;
};

// Carries the offending node so failures are debuggable from logs.
struct AdmissibilityError : Error {
  int node = -1;
  double rho = 0.0, internal_energy = 0.0;
  AdmissibilityError(const std::string &what, int node_, double rho_, double e_)
      : Error(what), node(node_), rho(rho_), internal_energy(e_) {}
};

struct CflError : Error {
  double admissible_dt = 0.0;
  CflError(const std::string &what, double dt) : Error(what), admissible_dt(dt) {}
};

struct SolverError : Error {
  std::vector<double> residual_history;
  SolverError(const std::string &what, std::vector<double> hist)
      : Error(what), residual_history(std::move(hist)) {}
};

struct CompatibilityError : Error {
  using Error::Error;
};

struct StepSizeError : Error {
  double admissible_dt = 0.0;
  StepSizeError(const std::string &what, double dt) : Error(what), admissible_dt(dt) {}
};

// splitmix64 / xoshiro256** as specified by Blackman & Vigna.  Fixed
// algorithm so that distorted meshes are bit-reproducible across platforms
// (the standard library distributions are not pinned by the C++ standard).
class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t z = seed;
    for (auto &w : state_) {
      z += 0x9e3779b97f4a7c15ull;
      std::uint64_t s = z;
      s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ull;
      s = (s ^ (s >> 27)) * 0x94d049bb133111ebull;
      w = s ^ (s >> 31);
    }
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [-1,1).
  double symmetric() { return 2.0 * uniform() - 1.0; }

private:
  std::uint64_t state_[4];
};

// Number of worker threads used by parallel kernels.  0 picks the hardware
// concurrency; 1 runs strictly serial (bitwise reproducible path).
int thread_count();
void set_thread_count(int n);

// Static partitioning over [0,n); deterministic for a fixed thread count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)> &chunk_body);

// Deterministic sum reduction: per-chunk partial sums combined in chunk order.
double parallel_sum(std::int64_t n, const std::function<double(std::int64_t, std::int64_t)> &chunk_sum);

}  // namespace ep
