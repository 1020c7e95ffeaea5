#include "clusterlab/spin_chain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

#include "clusterlab/bose_hubbard.hpp"
#include "clusterlab/errors.hpp"

namespace clusterlab {

namespace {

constexpr int kMaxSites = 30;

int wrap(int site, int n) { return ((site % n) + n) % n; }

PauliString term(double coeff, std::initializer_list<PauliFactor> f) {
  return PauliString(coeff, std::vector<PauliFactor>(f));
}

}  // namespace

char to_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': case 'i': return Pauli::I;
    case 'X': case 'x': return Pauli::X;
    case 'Y': case 'y': return Pauli::Y;
    case 'Z': case 'z': return Pauli::Z;
    default: throw DomainError(std::string("unknown Pauli operator '") + c + "'");
  }
}

PauliString PauliString::parse(const std::string& text, double coeff) {
  std::istringstream in(text);
  std::string tok;
  PauliString p(coeff, {});
  while (in >> tok) {
    if (tok.size() < 2) throw DomainError("malformed Pauli factor '" + tok + "'");
    const Pauli op = pauli_from_char(tok[0]);
    std::size_t used = 0;
    int site = 0;
    try {
      site = std::stoi(tok.substr(1), &used);
    } catch (const std::exception&) {
      throw DomainError("malformed Pauli factor '" + tok + "'");
    }
    if (used != tok.size() - 1) throw DomainError("malformed Pauli factor '" + tok + "'");
    p.factors.push_back({site, op});
  }
  return p;
}

void PauliString::validate(int n_sites) const {
  std::uint64_t seen = 0;
  for (const auto& f : factors) {
    if (f.site < 0 || f.site >= n_sites) {
      throw DomainError("Pauli factor site " + std::to_string(f.site) +
                        " outside [0, " + std::to_string(n_sites) + ")");
    }
    const std::uint64_t bit = std::uint64_t{1} << f.site;
    if (seen & bit) throw DomainError("Pauli string repeats site " + std::to_string(f.site));
    seen |= bit;
  }
}

std::string PauliString::to_string() const {
  std::ostringstream out;
  out << coefficient;
  for (const auto& f : factors) out << ' ' << to_char(f.op) << f.site;
  return out.str();
}

PauliMasks masks_of(const PauliString& p) {
  PauliMasks m;
  int n_y = 0;
  for (const auto& f : p.factors) {
    const std::uint64_t bit = std::uint64_t{1} << f.site;
    switch (f.op) {
      case Pauli::I: break;
      case Pauli::X: m.flip_mask |= bit; break;
      case Pauli::Y: m.flip_mask |= bit; m.sign_mask |= bit; ++n_y; break;
      case Pauli::Z: m.sign_mask |= bit; break;
    }
  }
  static constexpr cplx kPowI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  m.phase = kPowI[n_y % 4];
  return m;
}

// ---------------------------------------------------------------------------

SpinChainSpec::SpinChainSpec(int n_sites, Boundary boundary, std::vector<PauliString> terms)
    : n_sites_(n_sites), boundary_(boundary), terms_(std::move(terms)) {
  if (n_sites_ < 1 || n_sites_ > kMaxSites) {
    throw DomainError("n_sites must lie in [1, " + std::to_string(kMaxSites) + "]");
  }
  for (auto& t : terms_) {
    if (!std::isfinite(t.coefficient)) throw DomainError("non-finite term coefficient");
    if (boundary_ == Boundary::periodic) {
      for (auto& f : t.factors) f.site = wrap(f.site, n_sites_);
    }
    t.validate(n_sites_);
  }
}

void to_json(nlohmann::json& j, const SpinChainSpec& spec) {
  j = nlohmann::json{{"n", spec.n_sites()},
                     {"boundary", spec.boundary() == Boundary::periodic ? "periodic" : "open"}};
  auto terms = nlohmann::json::array();
  for (const auto& t : spec.terms()) {
    auto factors = nlohmann::json::array();
    for (const auto& f : t.factors) {
      factors.push_back(nlohmann::json::array({f.site, std::string(1, to_char(f.op))}));
    }
    terms.push_back({{"coeff", t.coefficient}, {"factors", factors}});
  }
  j["terms"] = terms;
}

SpinChainSpec spin_chain_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const std::string b = j.value("boundary", std::string("periodic"));
    Boundary boundary;
    if (b == "periodic") {
      boundary = Boundary::periodic;
    } else if (b == "open") {
      boundary = Boundary::open;
    } else {
      throw DomainError("unknown boundary '" + b + "'");
    }
    std::vector<PauliString> terms;
    for (const auto& t : j.at("terms")) {
      PauliString p(t.at("coeff").get<double>(), {});
      for (const auto& f : t.at("factors")) {
        const auto op = f.at(1).get<std::string>();
        if (op.size() != 1) throw DomainError("operator must be one of I,X,Y,Z");
        p.factors.push_back({f.at(0).get<int>(), pauli_from_char(op[0])});
      }
      terms.push_back(std::move(p));
    }
    return SpinChainSpec(n, boundary, std::move(terms));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed spin chain JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

StateVector::StateVector(int n_sites, std::vector<cplx> amplitudes)
    : n_sites_(n_sites), amps_(std::move(amplitudes)) {
  if (n_sites_ < 1 || n_sites_ > kMaxSites) throw DomainError("state n_sites out of range");
  if (amps_.size() != (std::size_t{1} << n_sites_)) {
    throw DimensionError("amplitude count " + std::to_string(amps_.size()) +
                         " does not match 2^" + std::to_string(n_sites_));
  }
}

StateVector StateVector::basis_state(int n_sites, std::uint64_t index) {
  std::vector<cplx> a(std::size_t{1} << n_sites);
  if (index >= a.size()) throw DomainError("basis index out of range");
  a[index] = 1.0;
  return StateVector(n_sites, std::move(a));
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

bool StateVector::is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }

StateVector StateVector::normalized() const {
  const double nrm = norm();
  if (nrm == 0.0) throw DomainError("cannot normalize the zero vector");
  std::vector<cplx> a(amps_);
  for (auto& x : a) x /= nrm;
  return StateVector(n_sites_, std::move(a));
}

StateVector operator+(const StateVector& a, const StateVector& b) {
  if (a.n_sites_ != b.n_sites_) throw DimensionError("state sizes differ");
  std::vector<cplx> out(a.amps_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.amps_[i];
  return StateVector(a.n_sites_, std::move(out));
}

StateVector operator*(cplx s, const StateVector& v) {
  std::vector<cplx> out(v.amps_);
  for (auto& x : out) x *= s;
  return StateVector(v.n_sites_, std::move(out));
}

cplx inner(const StateVector& a, const StateVector& b) {
  if (a.n_sites() != b.n_sites()) throw DimensionError("state sizes differ");
  cplx s{};
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// ---------------------------------------------------------------------------

PauliSum::PauliSum(const SpinChainSpec& spec) : PauliSum(spec.n_sites(), spec.terms()) {}

PauliSum::PauliSum(int n_sites, std::span<const PauliString> terms) : n_sites_(n_sites) {
  std::map<std::uint64_t, std::map<std::uint64_t, cplx>> grouped;
  for (const auto& t : terms) {
    t.validate(n_sites);
    const auto m = masks_of(t);
    grouped[m.flip_mask][m.sign_mask] += t.coefficient * m.phase;
  }
  for (const auto& [flip, parts] : grouped) {
    Group g{flip, {}};
    for (const auto& [sign, c] : parts) {
      if (c == cplx{}) continue;
      if (c.imag() != 0.0) real_ = false;
      g.parts.push_back({sign, c});
    }
    if (!g.parts.empty()) groups_.push_back(std::move(g));
  }
}

std::vector<std::uint64_t> PauliSum::flip_masks() const {
  std::vector<std::uint64_t> out;
  out.reserve(groups_.size());
  for (const auto& g : groups_) out.push_back(g.flip_mask);
  return out;
}

cplx PauliSum::group_element(const Group& g, std::uint64_t s) const {
  cplx v{};
  for (const auto& p : g.parts) {
    v += (std::popcount(s & p.sign_mask) & 1) ? -p.coeff : p.coeff;
  }
  return v;
}

void PauliSum::apply(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != dim() || out.size() != dim()) {
    throw DimensionError("operator acts on 2^" + std::to_string(n_sites_) + " amplitudes");
  }
  std::fill(out.begin(), out.end(), cplx{});
  const std::uint64_t d = dim();
  for (const auto& g : groups_) {
    for (std::uint64_t s = 0; s < d; ++s) {
      const cplx a = in[s];
      if (a == cplx{}) continue;
      out[s ^ g.flip_mask] += group_element(g, s) * a;
    }
  }
}

// ---------------------------------------------------------------------------

SpinChainSpec cluster_hamiltonian(int n, double b_field) {
  if (n < 3) throw DomainError("cluster Hamiltonian needs n >= 3");
  std::vector<PauliString> terms;
  terms.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    terms.push_back(term(-1.0, {{wrap(i - 1, n), Pauli::X}, {i, Pauli::Z}, {wrap(i + 1, n), Pauli::X}}));
  }
  if (b_field != 0.0) {
    for (int i = 0; i < n; ++i) terms.push_back(term(b_field, {{i, Pauli::Z}}));
  }
  return SpinChainSpec(n, Boundary::periodic, std::move(terms));
}

SpinChainSpec triangle_chain_hamiltonian(const EffectiveCouplings& c,
                                         const std::array<double, 3>& b_vec, int n) {
  if (n < 3) throw DomainError("triangle chain needs n >= 3");
  std::vector<PauliString> terms;
  auto add = [&](double coeff, std::initializer_list<PauliFactor> f) {
    if (coeff != 0.0) terms.push_back(term(coeff, f));
  };
  // On n = 3 the pairs (i, i+1) already enumerate all three triangle bonds.
  for (int i = 0; i < n; ++i) {
    const int j = wrap(i + 1, n);
    const int k = wrap(i + 2, n);
    add(b_vec[0], {{i, Pauli::X}});
    add(b_vec[1], {{i, Pauli::Y}});
    add(b_vec[2], {{i, Pauli::Z}});
    add(c.lambda1, {{i, Pauli::Z}, {j, Pauli::Z}});
    add(c.lambda2, {{i, Pauli::X}, {j, Pauli::X}});
    add(c.lambda2, {{i, Pauli::Y}, {j, Pauli::Y}});
    add(c.lambda3, {{i, Pauli::Z}, {j, Pauli::Z}, {k, Pauli::Z}});
    add(c.lambda4, {{i, Pauli::X}, {j, Pauli::Z}, {k, Pauli::X}});
    add(c.lambda4, {{i, Pauli::Y}, {j, Pauli::Z}, {k, Pauli::Y}});
  }
  return SpinChainSpec(n, Boundary::periodic, std::move(terms));
}

StateVector apply(const SpinChainSpec& spec, const StateVector& state) {
  if (spec.n_sites() != state.n_sites()) {
    throw DimensionError("spec has " + std::to_string(spec.n_sites()) + " sites, state has " +
                         std::to_string(state.n_sites()));
  }
  const PauliSum h(spec);
  std::vector<cplx> out(state.dim());
  h.apply(state.amplitudes(), out);
  return StateVector(state.n_sites(), std::move(out));
}

StateVector apply(const PauliString& op, const StateVector& state) {
  op.validate(state.n_sites());
  const auto m = masks_of(op);
  const cplx c = op.coefficient * m.phase;
  std::vector<cplx> out(state.dim());
  for (std::uint64_t s = 0; s < state.dim(); ++s) {
    const cplx v = (std::popcount(s & m.sign_mask) & 1) ? -c : c;
    out[s ^ m.flip_mask] = v * state[s];
  }
  return StateVector(state.n_sites(), std::move(out));
}

double expectation(const StateVector& state, const PauliString& op) {
  op.validate(state.n_sites());
  const auto m = masks_of(op);
  cplx acc{};
  for (std::uint64_t s = 0; s < state.dim(); ++s) {
    const cplx v = (std::popcount(s & m.sign_mask) & 1) ? -state[s] : state[s];
    acc += std::conj(state[s ^ m.flip_mask]) * v;
  }
  acc *= op.coefficient * m.phase;
  if (std::abs(acc.imag()) > 1e-10) {
    throw std::logic_error("expectation of a Hermitian Pauli string has imaginary part " +
                           std::to_string(acc.imag()));
  }
  return acc.real();
}

}  // namespace clusterlab
