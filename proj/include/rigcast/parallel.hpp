#pragma once

#include <cstddef>
#include <functional>

namespace rigcast {

// Worker count used by parallel_for; defaults to 1.
void set_jobs(int jobs);
int jobs();

// Runs body(i) for every i in [0, n). Work is spread over jobs() threads;
// calls made from inside a worker run serially. Callers write results by
// index so output never depends on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rigcast
