#include "rehab/metrics.hpp"

#include <complex>
#include <numbers>
#include <unsupported/Eigen/FFT>
#include <vector>

namespace rehab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::optional<double> return_time(const Eigen::ArrayXd& rel_deviation, double dt, double band, double hold,
                                  double horizon) {
  const Eigen::Index n = rel_deviation.size();
  const auto hold_n = static_cast<Eigen::Index>(std::ceil(hold / dt - 1e-9));
  // first start index followed by hold_n in-band samples
  Eigen::Index start = 0;
  Eigen::Index run = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(rel_deviation(i)) < band) {
      if (run == 0) start = i;
      if (++run > hold_n) break;
    } else {
      run = 0;
      if (static_cast<double>(i + 1) * dt > horizon) return std::nullopt;
    }
  }
  if (run <= hold_n) return std::nullopt;
  const double tau = static_cast<double>(start) * dt;
  if (tau > horizon) return std::nullopt;
  return tau;
}

std::optional<double> return_time(const Eigen::ArrayXd& energy, const Eigen::ArrayXd& baseline, double dt,
                                  double band, double hold, double horizon) {
  if (baseline.size() != energy.size() && baseline.size() != 1)
    throw std::invalid_argument("return_time: baseline must be scalar or aligned");
  Eigen::ArrayXd rel = baseline.size() == 1 ? ((energy - baseline(0)) / baseline(0)).eval()
                                            : ((energy - baseline) / baseline).eval();
  return return_time(rel, dt, band, hold, horizon);
}

double stability_rate(const Eigen::ArrayXd& rel_deviation, double band, Eigen::Index min_cycles) {
  if (rel_deviation.size() < min_cycles)
    throw std::invalid_argument("stability_rate: needs at least " + std::to_string(min_cycles) + " cycles");
  if (rel_deviation.size() == 0) return 0.0;
  return (rel_deviation.abs() < band).cast<double>().mean();
}

SpectralReport spectral_bands(const Eigen::ArrayXd& series, double sample_rate, double low_edge,
                              double high_edge) {
  const auto seg = static_cast<Eigen::Index>(std::lround(sample_rate));
  if (seg < 4 || series.size() < 2 * seg) throw std::invalid_argument("spectral_bands: need at least 2 s of samples");
  const Eigen::Index hop = seg / 2;

  Eigen::ArrayXd window(seg);
  for (Eigen::Index i = 0; i < seg; ++i)
    window(i) = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(seg));
  const double scale = 1.0 / (sample_rate * window.square().sum());

  const Eigen::Index n_bins = seg / 2 + 1;
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n_bins);
  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(seg));
  std::vector<std::complex<double>> spec;
  int n_seg = 0;
  for (Eigen::Index start = 0; start + seg <= series.size(); start += hop) {
    const Eigen::ArrayXd piece = series.segment(start, seg);
    const Eigen::ArrayXd tapered = (piece - piece.mean()) * window;
    for (Eigen::Index i = 0; i < seg; ++i) buf[static_cast<std::size_t>(i)] = tapered(i);
    fft.fwd(spec, buf);
    for (Eigen::Index k = 0; k < n_bins; ++k) acc(k) += std::norm(spec[static_cast<std::size_t>(k)]);
    ++n_seg;
  }

  SpectralReport report;
  report.psd = acc * (scale / n_seg);
  // one-sided: fold negative frequencies except DC and (even length) Nyquist
  const Eigen::Index last_fold = (seg % 2 == 0) ? n_bins - 1 : n_bins;
  report.psd.segment(1, last_fold - 1) *= 2.0;
  const double df = sample_rate / static_cast<double>(seg);
  report.freqs = Eigen::ArrayXd::LinSpaced(n_bins, 0.0, df * static_cast<double>(n_bins - 1));
  report.total = report.psd.sum() * df;
  report.band_low = (report.freqs < low_edge).select(report.psd, 0.0).sum() * df;
  report.band_high = (report.freqs >= high_edge).select(report.psd, 0.0).sum() * df;
  return report;
}

Eigen::ArrayXcd amplitude_spectrum(const Eigen::ArrayXd& series) {
  Eigen::FFT<double> fft;
  std::vector<double> in(series.data(), series.data() + series.size());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  return Eigen::Map<Eigen::ArrayXcd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::ArrayXd phase_randomize(const Eigen::ArrayXd& series, Stream& rng) {
  const auto n = static_cast<std::size_t>(series.size());
  if (n < 3) return series;
  Eigen::FFT<double> fft;
  std::vector<double> in(series.data(), series.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) {
    const double phi = kTwoPi * rng.uniform();
    spec[k] = std::polar(std::abs(spec[k]), phi);
    spec[n - k] = std::conj(spec[k]);
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Eigen::ArrayXd>(out.data(), static_cast<Eigen::Index>(n));
}

int xcorr_lag(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b, int max_lag) {
  const auto n = static_cast<int>(a.size());
  if (b.size() != a.size() || n < 3) throw std::invalid_argument("xcorr_lag: need equal lengths >= 3");
  max_lag = std::min(max_lag, n - 3);
  int best_lag = 0;
  double best = -2.0;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    const int len = n - std::abs(lag);
    const auto sa = lag >= 0 ? a.segment(lag, len) : a.segment(0, len);
    const auto sb = lag >= 0 ? b.segment(0, len) : b.segment(-lag, len);
    const auto r = force_velocity_correlation(sa, sb);
    if (r && *r > best) {
      best = *r;
      best_lag = lag;
    }
  }
  return best_lag;
}

double fundamental_phase(const Eigen::ArrayXd& series, int cycles) {
  const auto n = static_cast<double>(series.size());
  std::complex<double> acc = 0.0;
  for (Eigen::Index i = 0; i < series.size(); ++i)
    acc += series(i) * std::polar(1.0, -kTwoPi * cycles * static_cast<double>(i) / n);
  return std::arg(acc);
}

}  // namespace rehab
