#pragma once

// Internal helper: OpenMP loop over [0, n) that propagates the exception of
// the lowest failing index, so parallel and serial runs fail identically.

#include <cstddef>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sensi::detail {

template<typename Body>
void
parallel_for(std::size_t n, Body&& body)
{
  std::size_t failed_at = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(sensi_parallel_for_error)
      {
        if (static_cast<std::size_t>(k) < failed_at) {
          failed_at = static_cast<std::size_t>(k);
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure)
    std::rethrow_exception(failure);
}

template<typename Body>
void
serial_for(std::size_t n, Body&& body)
{
  for (std::size_t k = 0; k < n; ++k)
    body(k);
}

} // namespace sensi::detail
