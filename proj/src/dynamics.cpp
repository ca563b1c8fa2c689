// Copyright 2026 The qbattery Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qbat/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "qbat/errors.hpp"

namespace qbat {

// --- unitary --------------------------------------------------------------

namespace {

void check_square_match(const ComplexMatrix& h, const DensityMatrix& rho, const char* who) {
  if (h.rows() != h.cols() || h.rows() != rho.dim()) {
    throw UsageError(fmt::format("{}: Hamiltonian is {}x{} but state has dimension {}", who,
                                 h.rows(), h.cols(), rho.dim()));
  }
}

}  // namespace

UnitaryPropagator::UnitaryPropagator(const ComplexMatrix& h, DensityMatrix rho0)
    : eig_(herm_eig(h)), rho0_(std::move(rho0)) {
  check_square_match(h, rho0_, "propagate_unitary");
  rho0_eigenbasis_ = eig_.vectors.adjoint() * rho0_.data() * eig_.vectors;
}

DensityMatrix UnitaryPropagator::at(double t) const {
  if (t == 0.0) return rho0_;
  const Eigen::Index d = eig_.values.size();
  Eigen::VectorXcd phase(d);
  for (Eigen::Index k = 0; k < d; ++k) phase(k) = std::exp(-kI * eig_.values(k) * t);
  // rho_kl(t) = e^{-i(E_k - E_l)t} rho_kl in the eigenbasis.
  const ComplexMatrix evolved =
      phase.asDiagonal() * rho0_eigenbasis_ * phase.conjugate().asDiagonal();
  ComplexMatrix rho = eig_.vectors * evolved * eig_.vectors.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  return DensityMatrix::unchecked(rho0_.layout(), std::move(rho));
}

DensityMatrix propagate_unitary(const ComplexMatrix& h, const DensityMatrix& rho0, double t) {
  check_square_match(h, rho0, "propagate_unitary");
  if (t == 0.0) return rho0;
  return UnitaryPropagator(h, rho0).at(t);
}

// --- channels -------------------------------------------------------------

std::string to_string(ChannelLabel label) {
  switch (label) {
    case ChannelLabel::kGm: return "gm";
    case ChannelLabel::kMg: return "mg";
    case ChannelLabel::kEm: return "em";
    case ChannelLabel::kMe: return "me";
    case ChannelLabel::kMinus: return "minus";
    case ChannelLabel::kPlus: return "plus";
  }
  return "?";
}

ReservoirSpec ReservoirSpec::thermal(const ModelParams& p, double kt, double gamma0) {
  ReservoirSpec r;
  r.gamma0 = gamma0;
  r.nbar_g = bose_einstein(p.omega_m, kt);
  r.nbar_e = bose_einstein(p.omega_m - p.omega_eg, kt);
  r.nbar_q = bose_einstein(p.fc_frequency(), kt);
  return r;
}

void ReservoirSpec::validate() const {
  if (!(gamma0 >= 0.0) || !std::isfinite(gamma0)) {
    throw UsageError(fmt::format("gamma0: must be >= 0 (got {})", gamma0));
  }
  for (double n : {nbar_g, nbar_e, nbar_q}) {
    if (!(n >= 0.0) || !std::isfinite(n)) {
      throw UsageError(fmt::format("nbar: must be >= 0 (got {})", n));
    }
  }
}

void ReservoirSpec::check_consistent(const ModelParams& p, double kt, double rel_tol) const {
  const ReservoirSpec ref = thermal(p, kt, gamma0);
  auto check = [&](double got, double want, const char* name) {
    if (std::abs(got - want) > rel_tol * std::abs(want) + 1e-300) {
      throw UsageError(fmt::format("{}: {} is not the Bose-Einstein value {} at this temperature",
                                   name, got, want));
    }
  };
  check(nbar_g, ref.nbar_g, "nbar_g");
  check(nbar_e, ref.nbar_e, "nbar_e");
  check(nbar_q, ref.nbar_q, "nbar_q");
}

std::vector<LindbladChannel> build_channels(const ModelParams& p, const ReservoirSpec& res,
                                            const HilbertLayout& layout) {
  (void)p;
  res.validate();
  if (!layout.has_fock() || layout.atom_dim() != 3) {
    throw UsageError("build_channels needs a 3-level atom (x) Fock layout");
  }
  const ComplexMatrix b = annihilation(layout.n_max());
  const double g0 = res.gamma0;
  std::vector<LindbladChannel> out;
  out.push_back({ChannelLabel::kGm, on_atom(sigma(kG, kM, 3), layout), g0 * (res.nbar_g + 1.0)});
  out.push_back({ChannelLabel::kMg, on_atom(sigma(kM, kG, 3), layout), g0 * res.nbar_g});
  out.push_back({ChannelLabel::kEm, on_atom(sigma(kE, kM, 3), layout), g0 * (res.nbar_e + 1.0)});
  out.push_back({ChannelLabel::kMe, on_atom(sigma(kM, kE, 3), layout), g0 * res.nbar_e});
  out.push_back({ChannelLabel::kMinus, on_fock(b, layout), g0 * (res.nbar_q + 1.0)});
  out.push_back({ChannelLabel::kPlus, on_fock(b.adjoint(), layout), g0 * res.nbar_q});
  return out;
}

EnergyOperators EnergyOperators::from_model(const ModelParams& p, const HilbertLayout& layout) {
  EnergyOperators e;
  e.battery = battery_hamiltonian(p, layout);
  e.mode = bare_hamiltonian(p, layout) - e.battery;
  return e;
}

double EnergyLedger::total_heat() const {
  double q = 0.0;
  for (const auto& [label, v] : heat_by_channel) q += v;
  return q;
}

double EnergyLedger::heat(ChannelLabel label) const {
  const auto it = heat_by_channel.find(to_string(label));
  return it == heat_by_channel.end() ? 0.0 : it->second;
}

// --- master equation, dense Runge-Kutta ------------------------------------

namespace {

struct DenseGenerator {
  const ComplexMatrix& h;
  std::vector<const LindbladChannel*> active;
  std::vector<ComplexMatrix> ldl;  // rate-free L^+ L per active channel

  DenseGenerator(const ComplexMatrix& ham, std::span<const LindbladChannel> channels) : h(ham) {
    for (const auto& c : channels) {
      if (c.rate > 0.0) {
        active.push_back(&c);
        ldl.push_back(c.jump.adjoint() * c.jump);
      }
    }
  }

  ComplexMatrix dissipator(std::size_t k, const ComplexMatrix& rho) const {
    const auto& c = *active[k];
    return c.rate * (2.0 * c.jump * rho * c.jump.adjoint() - ldl[k] * rho - rho * ldl[k]);
  }

  ComplexMatrix hamiltonian_part(const ComplexMatrix& rho) const {
    return -kI * (h * rho - rho * h);
  }

  ComplexMatrix operator()(const ComplexMatrix& rho) const {
    ComplexMatrix out = hamiltonian_part(rho);
    for (std::size_t k = 0; k < active.size(); ++k) out += dissipator(k, rho);
    return out;
  }
};

// State of the dense integrator: rho plus the heat/work accumulators.
struct DenseState {
  ComplexMatrix rho;
  Eigen::VectorXd acc;  // [Q per active channel..., W]
};

struct DenseRhs {
  const DenseGenerator& gen;
  const ComplexMatrix* bare;  // may be null

  DenseState operator()(const DenseState& s) const {
    DenseState d;
    d.rho = gen.hamiltonian_part(s.rho);
    d.acc = Eigen::VectorXd::Zero(s.acc.size());
    if (bare) d.acc(d.acc.size() - 1) = (d.rho * *bare).trace().real();
    for (std::size_t k = 0; k < gen.active.size(); ++k) {
      const ComplexMatrix dk = gen.dissipator(k, s.rho);
      if (bare) d.acc(static_cast<Eigen::Index>(k)) = (dk * *bare).trace().real();
      d.rho += dk;
    }
    return d;
  }
};

DenseState axpy(const DenseState& s, double a, const DenseState& k) {
  return {s.rho + a * k.rho, s.acc + a * k.acc};
}

DenseState rk4_step(const DenseRhs& f, const DenseState& s, double h) {
  const DenseState k1 = f(s);
  const DenseState k2 = f(axpy(s, h / 2, k1));
  const DenseState k3 = f(axpy(s, h / 2, k2));
  const DenseState k4 = f(axpy(s, h, k3));
  DenseState out = s;
  out.rho += (h / 6.0) * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
  out.acc += (h / 6.0) * (k1.acc + 2.0 * k2.acc + 2.0 * k3.acc + k4.acc);
  return out;
}

class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::string& path, const HilbertLayout& layout,
                   const std::vector<std::string>& heat_labels)
      : layout_(layout) {
    if (path.empty()) return;
    out_.open(path);
    if (!out_) throw UsageError(fmt::format("cannot open trajectory dump '{}'", path));
    out_ << "t,p_g,p_e,p_m,mean_n";
    for (const auto& l : heat_labels) out_ << ",heat_" << l;
    out_ << '\n';
  }

  bool enabled() const { return out_.is_open(); }

  void write(double t, const ComplexMatrix& rho, const std::vector<double>& heats) {
    if (!enabled()) return;
    const int df = layout_.fock_dim();
    double pa[3] = {0.0, 0.0, 0.0};
    double mean_n = 0.0;
    for (int a = 0; a < layout_.atom_dim(); ++a) {
      for (int n = 0; n < df; ++n) {
        const double p = rho(a * df + n, a * df + n).real();
        pa[a] += p;
        mean_n += n * p;
      }
    }
    out_ << fmt::format("{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}", t, pa[0], pa[1], pa[2], mean_n);
    for (double q : heats) out_ << fmt::format(",{:.12e}", q);
    out_ << '\n';
  }

 private:
  HilbertLayout layout_;
  std::ofstream out_;
};

double operator_scale(const ComplexMatrix& h) {
  return h.cwiseAbs().rowwise().sum().maxCoeff();
}

LindbladResult evolve_rk4(const ComplexMatrix& h, std::span<const LindbladChannel> channels,
                          const DensityMatrix& rho0, double t_final, const LindbladOptions& opts) {
  const DenseGenerator gen(h, channels);
  std::optional<ComplexMatrix> bare;
  if (opts.energies) bare = opts.energies->total();
  const DenseRhs rhs{gen, bare ? &*bare : nullptr};

  std::vector<std::string> heat_labels;
  for (const auto& c : channels) heat_labels.push_back(to_string(c.label));
  TrajectoryWriter dump(opts.dump_path, rho0.layout(), heat_labels);

  double max_rate = 0.0;
  for (const auto* c : gen.active) max_rate = std::max(max_rate, c->rate);
  const double scale = std::max(operator_scale(h), max_rate);
  double step = opts.rk4_initial_step > 0.0 ? opts.rk4_initial_step
                : scale > 0.0                ? 1.0 / (50.0 * scale)
                                             : t_final;
  const double min_step = opts.rk4_min_step > 0.0 ? opts.rk4_min_step : t_final * 1e-14;

  DenseState s{rho0.data(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gen.active.size()) + 1)};
  const double trace0 = rho0.trace();
  LindbladResult result{rho0, {}, 0.0, true, 0.0, 0};

  auto heats_of = [&](const DenseState& st) {
    std::vector<double> q(channels.size(), 0.0);
    std::size_t k = 0;
    for (std::size_t c = 0; c < channels.size(); ++c) {
      if (channels[c].rate > 0.0) q[c] = st.acc(static_cast<Eigen::Index>(k++));
    }
    return q;
  };

  const int samples = std::max(1, opts.dump_samples);
  int next_sample = 1;
  dump.write(0.0, s.rho, heats_of(s));

  double t = 0.0;
  while (t < t_final) {
    double target = t_final;
    if (dump.enabled()) target = std::min(target, t_final * next_sample / samples);
    const double h_try = std::min(step, target - t);
    const DenseState full = rk4_step(rhs, s, h_try);
    const DenseState half = rk4_step(rhs, rk4_step(rhs, s, h_try / 2), h_try / 2);
    const double ref = std::max(1.0, half.rho.cwiseAbs().maxCoeff());
    const double err = (full.rho - half.rho).cwiseAbs().maxCoeff() / ref;
    if (!half.rho.allFinite()) throw IntegrationError("master equation produced non-finite state");
    if (err > opts.rk4_tol) {
      step = h_try / 2;
      if (step < min_step) {
        throw IntegrationError(fmt::format(
            "step size underflow at t = {:.6e} s (step {:.3e} s, local error {:.3e})", t, step, err));
      }
      continue;
    }
    s = half;
    const ComplexMatrix sym = 0.5 * (s.rho + s.rho.adjoint());
    result.max_symmetrization =
        std::max(result.max_symmetrization, (sym - s.rho).cwiseAbs().maxCoeff());
    s.rho = sym;
    t += h_try;
    ++result.steps;
    const double drift = std::abs(s.rho.trace().real() - trace0);
    result.trace_drift = std::max(result.trace_drift, drift);
    if (dump.enabled() && t >= target) {
      dump.write(t, s.rho, heats_of(s));
      ++next_sample;
    }
    if (err < opts.rk4_tol / 64.0 && h_try == step) step *= 2.0;
  }

  result.state = DensityMatrix::unchecked(rho0.layout(), s.rho);
  result.trace_ok = result.trace_drift <= opts.trace_tol;
  if (opts.energies) {
    auto& lg = result.ledger;
    const auto q = heats_of(s);
    for (std::size_t c = 0; c < channels.size(); ++c) {
      lg.heat_by_channel[to_string(channels[c].label)] += q[c];
    }
    lg.w_drive = s.acc(s.acc.size() - 1);
    lg.u_battery_initial = (rho0.data() * opts.energies->battery).trace().real();
    lg.u_fc_initial = (rho0.data() * opts.energies->mode).trace().real();
    lg.u_battery = (s.rho * opts.energies->battery).trace().real();
    lg.u_fc = (s.rho * opts.energies->mode).trace().real();
  }
  return result;
}

}  // namespace

// --- master equation, exact sector propagator ------------------------------

SectorPropagator::SectorPropagator(const ComplexMatrix& h,
                                   std::span<const LindbladChannel> channels,
                                   const DensityMatrix& rho0,
                                   std::optional<EnergyOperators> energies)
    : layout_(rho0.layout()), energies_(std::move(energies)) {
  const int d = rho0.dim();
  if (h.rows() != d || h.cols() != d) {
    throw UsageError("SectorPropagator: Hamiltonian does not match the state dimension");
  }
  const double h_scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermiticity_error(h) > 1e-10 * h_scale) {
    throw UsageError("SectorPropagator: Hamiltonian is not Hermitian");
  }
  std::vector<const LindbladChannel*> active;
  for (const auto& c : channels) {
    if (c.rate < 0.0) throw UsageError("negative channel rate");
    if (c.jump.rows() != d || c.jump.cols() != d) {
      throw UsageError("jump operator does not match the state dimension");
    }
    labels_.push_back(c.label);
    if (c.rate > 0.0) active.push_back(&c);
  }
  // K = sum rate L^+ L enters the anticommutator.
  ComplexMatrix k = ComplexMatrix::Zero(d, d);
  for (const auto* c : active) k += c->rate * (c->jump.adjoint() * c->jump);

  // Reachable matrix elements from the support of rho0.
  std::vector<int> slot(static_cast<std::size_t>(d) * d, -1);
  auto key = [d](int i, int j) { return static_cast<std::size_t>(i) * d + j; };
  std::deque<std::pair<int, int>> queue;
  auto visit = [&](int i, int j) {
    if (slot[key(i, j)] >= 0) return;
    slot[key(i, j)] = static_cast<int>(elements_.size());
    elements_.emplace_back(i, j);
    queue.emplace_back(i, j);
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (rho0.data()(i, j) != Complex(0.0, 0.0)) visit(i, j);
  for (int i = 0; i < d; ++i) visit(i, i);  // populations are always tracked
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    for (int q = 0; q < d; ++q) {
      if (h(q, i) != 0.0 || k(q, i) != 0.0) visit(q, j);
      if (h(j, q) != 0.0 || k(j, q) != 0.0) visit(i, q);
    }
    for (const auto* c : active) {
      for (int a = 0; a < d; ++a) {
        if (c->jump(a, i) == 0.0) continue;
        for (int b = 0; b < d; ++b)
          if (c->jump(b, j) != 0.0) visit(a, b);
      }
    }
  }
  diag_slot_.assign(static_cast<std::size_t>(d), -1);
  for (int i = 0; i < d; ++i) diag_slot_[static_cast<std::size_t>(i)] = slot[key(i, i)];

  const int m = sector_size();
  const int n_acc = static_cast<int>(labels_.size()) + 1;
  generator_ = ComplexMatrix::Zero(m + n_acc, m + n_acc);
  // Column (i,j) of the generator is L(E_ij) restricted to the sector.
  for (int col = 0; col < m; ++col) {
    const auto [i, j] = elements_[static_cast<std::size_t>(col)];
    for (int q = 0; q < d; ++q) {
      const Complex left = -kI * h(q, i) - k(q, i);  // (-iH - K) E_ij
      if (left != 0.0) generator_(slot[key(q, j)], col) += left;
      const Complex right = kI * h(j, q) - k(j, q);  // E_ij (iH - K)
      if (right != 0.0) generator_(slot[key(i, q)], col) += right;
    }
    for (const auto* c : active) {
      for (int a = 0; a < d; ++a) {
        const Complex la = c->jump(a, i);
        if (la == 0.0) continue;
        for (int b = 0; b < d; ++b) {
          const Complex lb = c->jump(b, j);
          if (lb != 0.0) generator_(slot[key(a, b)], col) += 2.0 * c->rate * la * std::conj(lb);
        }
      }
    }
  }
  // Accumulator rows: Tr(X E_ij) = X_ji.
  if (energies_) {
    const ComplexMatrix bare = energies_->total();
    // Accumulators are carried in units of the largest bare energy so the
    // augmented generator stays well scaled for the exponential.
    acc_scale_ = std::max(1.0, bare.diagonal().cwiseAbs().maxCoeff());
    const ComplexMatrix power = (-kI / acc_scale_) * (bare * h - h * bare);
    std::size_t act = 0;
    for (std::size_t c = 0; c < channels.size(); ++c) {
      if (channels[c].rate <= 0.0) continue;
      const auto& ch = *active[act++];
      const ComplexMatrix ldl = ch.jump.adjoint() * ch.jump;
      const ComplexMatrix flux =
          (ch.rate / acc_scale_) *
          (2.0 * ch.jump.adjoint() * bare * ch.jump - bare * ldl - ldl * bare);
      for (int col = 0; col < m; ++col) {
        const auto [i, j] = elements_[static_cast<std::size_t>(col)];
        generator_(m + static_cast<int>(c), col) = flux(j, i);
      }
    }
    for (int col = 0; col < m; ++col) {
      const auto [i, j] = elements_[static_cast<std::size_t>(col)];
      generator_(m + n_acc - 1, col) = power(j, i);
    }
  }
  y0_ = Eigen::VectorXcd::Zero(m + n_acc);
  for (int col = 0; col < m; ++col) {
    const auto [i, j] = elements_[static_cast<std::size_t>(col)];
    y0_(col) = rho0.data()(i, j);
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (rho0.data()(i, j) != Complex(0.0, 0.0) && slot[key(i, j)] < 0) {
        throw UsageError("SectorPropagator: initial state outside its own sector");
      }
}

ComplexMatrix SectorPropagator::step_matrix(double dt) const {
  return (generator_ * dt).exp();
}

SectorPropagator::Point SectorPropagator::advance(const Point& from, double dt) const {
  if (dt < 0.0) throw UsageError("SectorPropagator: negative time step");
  if (dt == 0.0) return from;
  Point out{from.t + dt, step_matrix(dt) * from.y};
  if (!out.y.allFinite()) throw IntegrationError("matrix exponential produced non-finite state");
  return out;
}

DensityMatrix SectorPropagator::density(const Point& pt) const {
  const int d = layout_.dim();
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  for (std::size_t s = 0; s < elements_.size(); ++s) {
    rho(elements_[s].first, elements_[s].second) = pt.y(static_cast<Eigen::Index>(s));
  }
  rho = 0.5 * (rho + rho.adjoint());
  return DensityMatrix::unchecked(layout_, std::move(rho));
}

double SectorPropagator::expectation(const ComplexMatrix& op, const Point& pt) const {
  Complex acc = 0.0;
  for (std::size_t s = 0; s < elements_.size(); ++s) {
    const auto [i, j] = elements_[s];
    acc += op(j, i) * pt.y(static_cast<Eigen::Index>(s));
  }
  return acc.real();
}

double SectorPropagator::population(int index, const Point& pt) const {
  return pt.y(diag_slot_.at(static_cast<std::size_t>(index))).real();
}

EnergyLedger SectorPropagator::ledger(const Point& pt) const {
  EnergyLedger lg;
  if (!energies_) return lg;
  const int m = sector_size();
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    lg.heat_by_channel[to_string(labels_[c])] +=
        acc_scale_ * pt.y(m + static_cast<int>(c)).real();
  }
  lg.w_drive = acc_scale_ * pt.y(m + static_cast<int>(labels_.size())).real();
  const Point p0 = initial();
  lg.u_battery_initial = expectation(energies_->battery, p0);
  lg.u_fc_initial = expectation(energies_->mode, p0);
  lg.u_battery = expectation(energies_->battery, pt);
  lg.u_fc = expectation(energies_->mode, pt);
  return lg;
}

LindbladResult evolve_lindblad(const ComplexMatrix& h, std::span<const LindbladChannel> channels,
                               const DensityMatrix& rho0, double t_final,
                               const LindbladOptions& opts) {
  if (!(t_final >= 0.0)) throw UsageError("evolve_lindblad: t_final must be >= 0");
  if (h.rows() != rho0.dim() || h.cols() != rho0.dim()) {
    throw UsageError("evolve_lindblad: Hamiltonian does not match the state dimension");
  }
  if (hermiticity_error(h) > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    throw UsageError("evolve_lindblad: Hamiltonian is not Hermitian");
  }
  for (const auto& c : channels) {
    if (c.rate < 0.0) throw UsageError("evolve_lindblad: negative channel rate");
    if (c.jump.rows() != rho0.dim() || c.jump.cols() != rho0.dim()) {
      throw UsageError("evolve_lindblad: jump operator does not match the state dimension");
    }
  }
  if (opts.method == LindbladOptions::Method::kRk4) {
    return evolve_rk4(h, channels, rho0, t_final, opts);
  }

  const SectorPropagator prop(h, channels, rho0, opts.energies);
  SectorPropagator::Point pt = prop.initial();
  LindbladResult result{rho0, {}, 0.0, true, 0.0, 1};
  if (!opts.dump_path.empty()) {
    std::vector<std::string> labels;
    for (const auto& c : channels) labels.push_back(to_string(c.label));
    TrajectoryWriter dump(opts.dump_path, rho0.layout(), labels);
    const int samples = std::max(1, opts.dump_samples);
    const ComplexMatrix step = prop.step_matrix(t_final / samples);
    auto heats = [&](const SectorPropagator::Point& p) {
      std::vector<double> q;
      const auto lg = prop.ledger(p);
      for (const auto& c : channels) q.push_back(lg.heat(c.label));
      return q;
    };
    dump.write(0.0, prop.density(pt).data(), heats(pt));
    for (int s = 1; s <= samples; ++s) {
      pt = {t_final * s / samples, step * pt.y};
      dump.write(pt.t, prop.density(pt).data(), heats(pt));
      result.trace_drift = std::max(result.trace_drift, std::abs(prop.density(pt).trace() - rho0.trace()));
    }
    result.steps = samples;
  } else {
    pt = prop.advance(pt, t_final);
  }
  result.state = prop.density(pt);
  result.trace_drift = std::max(result.trace_drift, std::abs(result.state.trace() - rho0.trace()));
  result.trace_ok = result.trace_drift <= opts.trace_tol;
  result.ledger = prop.ledger(pt);
  return result;
}

}  // namespace qbat
