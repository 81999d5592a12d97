#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xgnn/pencil.hpp"
#include "xgnn/solver.hpp"

namespace xgnn {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// %.17g; NaN becomes an empty cell.
inline std::string csv_real(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
  return out;
}

inline void check(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw IoError("write failed on '" + p.string() + "'");
}

}  // namespace detail

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

inline const char* kHistoryHeader = "iter,eta,energy_error,l2_error,h1_error,h2_error,width,lr,seconds\n";

inline std::string history_line(const HistoryRow& r) {
  return std::to_string(r.iter) + "," + csv_real(r.eta) + "," + csv_real(r.energy_error) + "," + csv_real(r.l2_error) +
         "," + csv_real(r.h1_error) + "," + csv_real(r.h2_error) + "," + std::to_string(r.width) + "," +
         csv_real(r.lr) + "," + csv_real(r.seconds) + "\n";
}

// Appends one flushed row per iteration so an aborted run keeps what it had.
class HistoryWriter {
 public:
  explicit HistoryWriter(std::filesystem::path p) : path_(std::move(p)), out_(detail::open_out(path_)) {
    out_ << kHistoryHeader;
    detail::check(out_, path_);
  }
  void append(const HistoryRow& r) {
    out_ << history_line(r);
    detail::check(out_, path_);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_history(const std::filesystem::path& p, const RunHistory& h) {
  HistoryWriter w(p);
  for (const auto& r : h.rows) w.append(r);
}

inline void write_mu_trace(const std::filesystem::path& p, const RunHistory& h) {
  auto out = detail::open_out(p);
  out << "step,term_id,re_mu,im_mu\n";
  for (const auto& m : h.mu_trace)
    out << m.step << "," << m.term_id << "," << csv_real(m.re) << "," << csv_real(m.im) << "\n";
  detail::check(out, p);
}

inline void write_pencil(const std::filesystem::path& p, const std::vector<PencilRoot>& roots) {
  auto out = detail::open_out(p);
  out << "alpha,re_lambda,im_lambda,residual\n";
  for (const auto& r : roots)
    out << csv_real(r.alpha) << "," << csv_real(r.xi) << "," << csv_real(r.zeta) << "," << csv_real(r.residual) << "\n";
  detail::check(out, p);
}

inline std::vector<std::string> field_names(const Setup& s) {
  if (s.spec.problem == Problem::Poisson) return {"u"};
  return {"u1", "u2", "p"};
}

struct FieldGrid {
  Vec x, y;
  std::vector<Vec> values;  // per component
};

// Uniform n×n grid over the bounding box of the interior rule, inside points only.
inline FieldGrid field_grid(const Subspace& S, const Setup& s, int n) {
  FieldGrid g;
  if (n < 2 || s.q.size() == 0) return g;
  const double x0 = s.q.x.minCoeff(), x1 = s.q.x.maxCoeff();
  const double y0 = s.q.y.minCoeff(), y1 = s.q.y.maxCoeff();
  std::vector<double> xs, ys;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point p(x0 + (x1 - x0) * i / (n - 1), y0 + (y1 - y0) * j / (n - 1));
      if (!s.domain.inside || s.domain.inside(p)) {
        xs.push_back(p.x());
        ys.push_back(p.y());
      }
    }
  g.x = Eigen::Map<Vec>(xs.data(), xs.size());
  g.y = Eigen::Map<Vec>(ys.data(), ys.size());
  ChannelMask vmask{};
  vmask[kV] = true;
  auto vals = S.eval(s.domain, g.x, g.y, vmask);
  for (int c = 0; c < s.ncomp(); ++c) g.values.push_back(c < static_cast<int>(vals.size()) ? vals[c][kV] : Vec::Zero(g.x.size()));
  if (s.spec.problem == Problem::Stokes && S.interior.size() > 2) {
    const double mean = s.q.w.dot(S.interior[2][kV]) / s.q.w.sum();
    g.values[2].array() -= mean;
  }
  return g;
}

inline void write_fields(const std::filesystem::path& dir, const Subspace& S, const Setup& s, int iter, int n) {
  const FieldGrid g = field_grid(S, s, n);
  const auto names = field_names(s);
  for (std::size_t c = 0; c < names.size() && c < g.values.size(); ++c) {
    const auto p = dir / ("field_" + names[c] + "_iter" + std::to_string(iter) + ".csv");
    auto out = detail::open_out(p);
    out << "x,y,value\n";
    for (int k = 0; k < g.x.size(); ++k)
      out << csv_real(g.x[k]) << "," << csv_real(g.y[k]) << "," << csv_real(g.values[c][k]) << "\n";
    detail::check(out, p);
  }
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  auto out = detail::open_out(p);
  out << text;
  detail::check(out, p);
}

}  // namespace xgnn
