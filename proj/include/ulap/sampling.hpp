#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ulap/errors.hpp"
#include "ulap/spectral.hpp"

// Seeded cadlag path sampling of the jump process with generator M: holding
// times are exponential with rate -M[x][x], the embedded chain jumps to y
// with probability M[x][y] / rate.  Each path owns a deterministic stream:
// the user seed and the path index are mixed through splitmix64 into an
// mt19937_64, so path k is reproducible regardless of how many paths run.

namespace ulap {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path_index) {
  std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ULL * (path_index + 1));
  const std::uint64_t a = splitmix64(state);
  const std::uint64_t b = splitmix64(state);
  return std::mt19937_64(a ^ (b << 1));
}

// Uniform draw in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exponential_draw(std::mt19937_64& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

struct JumpPath {
  std::vector<double> times;  // times[0] = 0
  std::vector<int> states;    // states[k] entered at times[k]
};

inline JumpPath sample_path(const Operator& op, int start, double horizon,
                            std::uint64_t seed, std::uint64_t path_index) {
  const int n = static_cast<int>(op.mu.size());
  if (start < 0 || start >= n) throw PreconditionError("start leaf out of range");
  if (horizon < 0) throw NegativeTimeError("negative sampling horizon");
  std::mt19937_64 rng = path_rng(seed, path_index);
  JumpPath path;
  path.times.push_back(0.0);
  path.states.push_back(start);
  double t = 0;
  int state = start;
  if (-op.M(start, start) <= 0) {
    throw AbsorbingStateError("initial leaf " + std::to_string(start) +
                              " has no outgoing rate");
  }
  while (true) {
    const double rate = -op.M(state, state);
    if (rate <= 0) break;  // absorbing mid-path: the state persists
    t += exponential_draw(rng, rate);
    if (t > horizon) break;
    const double u = uniform01(rng) * rate;
    double acc = 0;
    int next = -1;
    for (int y = 0; y < n; ++y) {
      if (y == state) continue;
      acc += op.M(state, y);
      if (u < acc) {
        next = y;
        break;
      }
    }
    if (next < 0) {
      // Guard against rounding at the top of the cumulative scan.
      for (int y = n - 1; y >= 0; --y) {
        if (y != state && op.M(state, y) > 0) {
          next = y;
          break;
        }
      }
    }
    if (next < 0) break;
    state = next;
    path.times.push_back(t);
    path.states.push_back(state);
  }
  return path;
}

inline std::vector<JumpPath> sample_paths(const Operator& op, int start,
                                          double horizon, std::size_t n_paths,
                                          std::uint64_t seed) {
  std::vector<JumpPath> out;
  out.reserve(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) {
    out.push_back(sample_path(op, start, horizon, seed, k));
  }
  return out;
}

// State of a cadlag path at a given time.
inline int path_state_at(const JumpPath& path, double t) {
  int state = path.states.front();
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    if (path.times[k] <= t) state = path.states[k];
    else break;
  }
  return state;
}

// Empirical occupation distribution of a path family at a given time.
inline std::vector<double> occupation_at(const std::vector<JumpPath>& paths,
                                         double t, int n_states) {
  std::vector<double> out(n_states, 0.0);
  if (paths.empty()) return out;
  for (const JumpPath& p : paths) out[path_state_at(p, t)] += 1.0;
  for (double& x : out) x /= static_cast<double>(paths.size());
  return out;
}

}  // namespace ulap
