#pragma once

#include <vector>

#include "lowrank/parallel.hpp"

namespace lowrank {

template <class SignalFn>
RejectionRate empirical_power(const DetectionTest& test, std::size_t reps, const RngStream& rng,
                              std::size_t threads, SignalFn&& signal) {
  std::vector<char> rejected(reps, 0);
  parallel_for(reps, threads, [&](std::size_t r) {
    const RngStream stream = rng.child(r);
    const SquareMatrix theta = signal(r, stream.child(0));
    const Dataset data = generate_dataset(test.n, test.d, theta, stream.child(1));
    rejected[r] = decide(test, data) == Decision::reject ? 1 : 0;
  });
  std::size_t count = 0;
  for (char c : rejected) count += static_cast<std::size_t>(c);
  return rejection_rate(count, reps);
}

}  // namespace lowrank
