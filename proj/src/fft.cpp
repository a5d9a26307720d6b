#include "decaylab/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace decaylab::fft {

namespace {

// The FFTW planner is not re-entrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanPair {
  int rows = 0;
  int cols = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  PlanPair(int r, int c) : rows(r), cols(c) {
    const std::size_t n_real = static_cast<std::size_t>(r) * c;
    const std::size_t n_spec = static_cast<std::size_t>(r) * (c / 2 + 1);
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(n_real);
    spec = fftw_alloc_complex(n_spec);
    fwd = fftw_plan_dft_r2c_2d(r, c, real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(r, c, spec, real, FFTW_ESTIMATE);
  }
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
  ~PlanPair() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

PlanPair& plans_for(int rows, int cols) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<PlanPair>> cache;
  auto& slot = cache[{rows, cols}];
  if (!slot) slot = std::make_unique<PlanPair>(rows, cols);
  return *slot;
}

}  // namespace

Spectrum forward(const Grid& g) {
  if (g.empty()) throw std::invalid_argument("fft::forward: empty grid");
  PlanPair& p = plans_for(g.rows, g.cols);
  std::memcpy(p.real, g.values.data(), g.values.size() * sizeof(double));
  fftw_execute(p.fwd);
  Spectrum s;
  s.rows = g.rows;
  s.cols = g.cols;
  const std::size_t n = static_cast<std::size_t>(g.rows) * s.bin_cols();
  s.bins.resize(n);
  std::memcpy(reinterpret_cast<double*>(s.bins.data()), p.spec, n * sizeof(fftw_complex));
  return s;
}

Grid inverse(const Spectrum& s) {
  PlanPair& p = plans_for(s.rows, s.cols);
  // c2r destroys its input, so always go through the scratch buffer.
  std::memcpy(p.spec, reinterpret_cast<const double*>(s.bins.data()), s.bins.size() * sizeof(fftw_complex));
  fftw_execute(p.inv);
  Grid g(s.rows, s.cols);
  const double norm = 1.0 / (static_cast<double>(s.rows) * s.cols);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = p.real[i] * norm;
  return g;
}

Grid correlate_valid(const Grid& g, const Grid& k) {
  if (k.rows > g.rows || k.cols > g.cols) throw std::invalid_argument("correlate_valid: kernel larger than signal");
  // Circular correlation at the signal size never wraps for valid placements.
  Grid padded(g.rows, g.cols);
  for (int r = 0; r < k.rows; ++r)
    for (int c = 0; c < k.cols; ++c) padded.at(r, c) = k.at(r, c);
  Spectrum sg = forward(g);
  const Spectrum sk = forward(padded);
  for (std::size_t i = 0; i < sg.bins.size(); ++i) sg.bins[i] *= std::conj(sk.bins[i]);
  const Grid full = inverse(sg);
  Grid out(g.rows - k.rows + 1, g.cols - k.cols + 1);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out.at(r, c) = full.at(r, c);
  return out;
}

}  // namespace decaylab::fft
