#pragma once

// Small dense kernels shared by the grammar charts. Blocks are |A| x |A|
// row-major arrays indexed [left boundary][right boundary].

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

#include "cmseq/errors.hpp"
#include "cmseq/grammar.hpp"
#include "cmseq/markov.hpp"

namespace cmseq::detail {

// out = left * step, i.e. contracts the left block's right boundary with one
// Markov transition.
inline void through_step(const double* left, const Matrix& step, std::size_t a, double* out) {
  std::fill(out, out + a * a, 0.0);
  for (std::size_t x = 0; x < a; ++x) {
    for (std::size_t u = 0; u < a; ++u) {
      const double l = left[x * a + u];
      if (l == 0.0) continue;
      for (std::size_t v = 0; v < a; ++v) out[x * a + v] += l * step(u, v);
    }
  }
}

// out += lhs * rhs
inline void accumulate_product(const double* lhs, const double* rhs, std::size_t a, double* out) {
  for (std::size_t x = 0; x < a; ++x) {
    for (std::size_t v = 0; v < a; ++v) {
      const double l = lhs[x * a + v];
      if (l == 0.0) continue;
      for (std::size_t y = 0; y < a; ++y) out[x * a + y] += l * rhs[v * a + y];
    }
  }
}

inline bool all_zero(const double* block, std::size_t a) {
  return std::all_of(block, block + a * a, [](double v) { return v == 0.0; });
}

// Runs body(i) for i in [0, count), split across up to `threads` workers.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body body) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline void check_alphabet(const ChainModel& chain, const CnfGrammar& g) {
  if (!(chain.alphabet() == g.terminals())) {
    throw Error(ErrorCode::kAlphabetMismatch,
                "grammar terminals differ from the model alphabet; align them with "
                "CnfGrammar::with_terminals first");
  }
}

}  // namespace cmseq::detail
