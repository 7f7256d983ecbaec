/*
 * Copyright 2026 The qcafqmc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "qcafqmc/integrals.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "qcafqmc/binio.hpp"

namespace qcafqmc {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

RMatrix IntegralSet::pair_matrix() const {
  const int n2 = n_orb * n_orb;
  RMatrix v(n2, n2);
  for (int p = 0; p < n_orb; ++p)
    for (int q = 0; q < n_orb; ++q)
      for (int r = 0; r < n_orb; ++r)
        for (int s = 0; s < n_orb; ++s) v(p * n_orb + q, r * n_orb + s) = eri(p, q, r, s);
  return v;
}

IntegralSet CholeskyHamiltonian::reconstruct() const {
  IntegralSet out;
  out.n_orb = n_orb;
  out.e_core = e_core;
  out.t = t;
  out.n_alpha = n_alpha;
  out.n_beta = n_beta;
  out.g.assign(static_cast<std::size_t>(n_orb) * n_orb * n_orb * n_orb, 0.0);
  for (const auto& l : L)
    for (int p = 0; p < n_orb; ++p)
      for (int q = 0; q < n_orb; ++q)
        for (int r = 0; r < n_orb; ++r)
          for (int s = 0; s < n_orb; ++s) out.eri(p, q, r, s) += l(p, q) * l(r, s);
  return out;
}

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

// Fortran exponents ("1.0D-03") are accepted.
bool parse_real(std::string tok, double& out) {
  std::replace(tok.begin(), tok.end(), 'D', 'E');
  std::replace(tok.begin(), tok.end(), 'd', 'e');
  try {
    std::size_t used = 0;
    out = std::stod(tok, &used);
    return used == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_int(const std::string& tok, int& out) {
  try {
    std::size_t used = 0;
    out = std::stoi(tok, &used);
    return used == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

// Extracts KEY=value pairs from the namelist header. ORBSYM-style lists are
// skipped; only scalar integer keys are retained.
std::map<std::string, int> parse_header(const std::string& header) {
  std::map<std::string, int> keys;
  std::string h = upper(header);
  for (char& c : h)
    if (c == ',' || c == '\n' || c == '\r' || c == '\t') c = ' ';
  std::size_t pos = 0;
  while ((pos = h.find('=', pos)) != std::string::npos) {
    std::size_t k_end = pos;
    while (k_end > 0 && h[k_end - 1] == ' ') --k_end;
    std::size_t k_beg = k_end;
    while (k_beg > 0 && (std::isalnum(static_cast<unsigned char>(h[k_beg - 1])) || h[k_beg - 1] == '_'))
      --k_beg;
    std::string key = h.substr(k_beg, k_end - k_beg);
    std::size_t v_beg = pos + 1;
    while (v_beg < h.size() && h[v_beg] == ' ') ++v_beg;
    std::size_t v_end = v_beg;
    while (v_end < h.size() && h[v_end] != ' ') ++v_end;
    int value = 0;
    if (parse_int(h.substr(v_beg, v_end - v_beg), value)) keys[key] = value;
    pos = v_end;
  }
  return keys;
}

void set_eri_symmetric(IntegralSet& ints, int p, int q, int r, int s, double v,
                       std::vector<char>& seen, int line_no) {
  const int idx[8][4] = {{p, q, r, s}, {q, p, r, s}, {p, q, s, r}, {q, p, s, r},
                         {r, s, p, q}, {s, r, p, q}, {r, s, q, p}, {s, r, q, p}};
  const int n = ints.n_orb;
  for (const auto& c : idx) {
    const std::size_t flat = ((static_cast<std::size_t>(c[0]) * n + c[1]) * n + c[2]) * n + c[3];
    if (seen[flat] && std::abs(ints.g[flat] - v) > 1e-10) {
      throw InconsistentIntegralsError("line " + std::to_string(line_no) +
                                       ": two-electron record contradicts an earlier symmetric record");
    }
    ints.g[flat] = v;
    seen[flat] = 1;
  }
}

}  // namespace

IntegralSet load_fcidump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open FCIDUMP " + path.string());

  std::string header;
  std::string line;
  int line_no = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++line_no;
    header += line + "\n";
    const std::string u = upper(line);
    if (u.find("&END") != std::string::npos || u.find('/') != std::string::npos) {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw MalformedInputError(path.string() + ": missing &END terminating the header");

  const auto keys = parse_header(header);
  if (!keys.contains("NORB") || !keys.contains("NELEC"))
    throw MalformedInputError(path.string() + ": header lacks NORB or NELEC");
  const int ms2 = keys.contains("MS2") ? keys.at("MS2") : 0;

  IntegralSet ints;
  ints.n_orb = keys.at("NORB");
  const int nelec = keys.at("NELEC");
  if (ints.n_orb <= 0 || nelec < 0 || (nelec + ms2) % 2 != 0 || std::abs(ms2) > nelec)
    throw MalformedInputError(path.string() + ": inconsistent NORB/NELEC/MS2");
  ints.n_alpha = (nelec + ms2) / 2;
  ints.n_beta = (nelec - ms2) / 2;
  const int n = ints.n_orb;
  ints.t = RMatrix::Zero(n, n);
  ints.g.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
  std::vector<char> seen(ints.g.size(), 0);
  RMatrix t_seen = RMatrix::Zero(n, n);

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string w; ss >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    double value = 0.0;
    int ix[4] = {0, 0, 0, 0};
    bool ok = tok.size() == 5 && parse_real(tok[0], value);
    for (int k = 0; ok && k < 4; ++k) ok = parse_int(tok[k + 1], ix[k]);
    if (!ok) throw MalformedInputError(path.string() + ": line " + std::to_string(line_no) + ": cannot parse record");
    for (int k = 0; k < 4; ++k)
      if (ix[k] < 0 || ix[k] > n)
        throw MalformedInputError(path.string() + ": line " + std::to_string(line_no) + ": index out of range");
    const auto [i, j, k, l] = ix;
    if (i == 0 && j == 0 && k == 0 && l == 0) {
      ints.e_core = value;
    } else if (k == 0 && l == 0) {
      if (i == 0 || j == 0)
        throw MalformedInputError(path.string() + ": line " + std::to_string(line_no) + ": orbital energy records are not supported");
      const int p = i - 1, q = j - 1;
      for (auto [a, b] : {std::pair{p, q}, std::pair{q, p}}) {
        if (t_seen(a, b) != 0.0 && std::abs(ints.t(a, b) - value) > 1e-10)
          throw InconsistentIntegralsError(path.string() + ": line " + std::to_string(line_no) + ": one-electron record is not symmetric");
        ints.t(a, b) = value;
        t_seen(a, b) = 1.0;
      }
    } else {
      if (i == 0 || j == 0 || k == 0 || l == 0)
        throw MalformedInputError(path.string() + ": line " + std::to_string(line_no) + ": partial zero index");
      set_eri_symmetric(ints, i - 1, j - 1, k - 1, l - 1, value, seen, line_no);
    }
  }

  validate_integrals(ints);
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(ints.pair_matrix(), Eigen::EigenvaluesOnly);
  const double min_ev = eig.eigenvalues().minCoeff();
  if (min_ev < -1e-8) {
    std::ostringstream msg;
    msg << path.string() << ": two-electron pair matrix is not positive semidefinite (eigenvalue "
        << std::scientific << min_ev << ")";
    throw InconsistentIntegralsError(msg.str());
  }
  return ints;
}

void validate_integrals(const IntegralSet& ints, double tol) {
  const int n = ints.n_orb;
  if (ints.t.rows() != n || ints.t.cols() != n ||
      ints.g.size() != static_cast<std::size_t>(n) * n * n * n)
    throw InconsistentIntegralsError("integral arrays do not match n_orb");
  if ((ints.t - ints.t.transpose()).cwiseAbs().maxCoeff() > tol)
    throw InconsistentIntegralsError("one-electron integrals are not symmetric");
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const double v = ints.eri(p, q, r, s);
          if (std::abs(v - ints.eri(q, p, r, s)) > tol || std::abs(v - ints.eri(r, s, p, q)) > tol ||
              std::abs(v - ints.eri(p, q, s, r)) > tol)
            throw InconsistentIntegralsError("two-electron integrals violate 8-fold symmetry");
        }
}

void write_fcidump(const IntegralSet& ints, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ArchiveError("cannot write " + path.string());
  const int n = ints.n_orb;
  out << " &FCI NORB=" << n << ",NELEC=" << ints.n_elec() << ",MS2=" << (ints.n_alpha - ints.n_beta) << ",\n";
  out << "  ORBSYM=";
  for (int p = 0; p < n; ++p) out << "1,";
  out << "\n  ISYM=1,\n &END\n";
  out << std::setprecision(17);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s <= r; ++s) {
          if (p * (p + 1) / 2 + q < r * (r + 1) / 2 + s) continue;
          const double v = ints.eri(p, q, r, s);
          if (v != 0.0) out << v << ' ' << p + 1 << ' ' << q + 1 << ' ' << r + 1 << ' ' << s + 1 << '\n';
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      if (ints.t(p, q) != 0.0) out << ints.t(p, q) << ' ' << p + 1 << ' ' << q + 1 << " 0 0\n";
  out << ints.e_core << " 0 0 0 0\n";
}

CholeskyHamiltonian cholesky_factorize(const IntegralSet& ints, double tol) {
  const int n = ints.n_orb;
  const int n2 = n * n;
  const RMatrix v = ints.pair_matrix();
  RVector diag = v.diagonal();
  std::vector<RVector> vecs;

  while (static_cast<int>(vecs.size()) < n2) {
    int piv = 0;
    for (int i = 1; i < n2; ++i)
      if (diag(i) > diag(piv) + 1e-14) piv = i;
    if (diag.minCoeff() < -tol)
      throw NotPsdError("negative Cholesky residual " + std::to_string(diag.minCoeff()) + " beyond tolerance");
    if (diag(piv) < tol) break;
    RVector col = v.col(piv);
    for (const auto& l : vecs) col -= l * l(piv);
    col /= std::sqrt(diag(piv));
    diag -= col.cwiseAbs2();
    diag(piv) = 0.0;
    vecs.push_back(std::move(col));
  }

  CholeskyHamiltonian ham;
  ham.n_orb = n;
  ham.e_core = ints.e_core;
  ham.t = ints.t;
  ham.chol_tol = tol;
  ham.n_alpha = ints.n_alpha;
  ham.n_beta = ints.n_beta;
  ham.v0 = ints.t;
  for (const auto& c : vecs) {
    RMatrix l(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) l(p, q) = c(p * n + q);
    l = 0.5 * (l + l.transpose()).eval();
    ham.v0 -= 0.5 * l * l;
    ham.L.push_back(std::move(l));
  }
  return ham;
}

EmbeddedSystem build_embedded(const IntegralSet& ints, const std::vector<int>& core,
                              const std::vector<int>& active, double chol_tol) {
  const int n = ints.n_orb;
  std::vector<int> owner(n, -1);
  auto claim = [&](const std::vector<int>& list, int tag) {
    for (int p : list) {
      if (p < 0 || p >= n) throw PartitionError("orbital index " + std::to_string(p) + " out of range");
      if (owner[p] != -1) throw PartitionError("orbital " + std::to_string(p) + " appears in more than one space");
      owner[p] = tag;
    }
  };
  claim(core, 0);
  claim(active, 1);
  if (active.empty()) throw PartitionError("active space is empty");
  const int nc = static_cast<int>(core.size());
  if (ints.n_alpha < nc || ints.n_beta < nc)
    throw PartitionError("not enough electrons to doubly occupy the core");

  EmbeddedSystem sys;
  sys.n_full = n;
  sys.core = core;
  sys.active = active;
  for (int p = 0; p < n; ++p)
    if (owner[p] == -1) sys.virt.push_back(p);

  const int na = static_cast<int>(active.size());
  IntegralSet& a = sys.active_ints;
  a.n_orb = na;
  a.n_alpha = ints.n_alpha - nc;
  a.n_beta = ints.n_beta - nc;
  a.e_core = ints.e_core;
  for (int c : core) {
    a.e_core += 2.0 * ints.t(c, c);
    for (int d : core) a.e_core += 2.0 * ints.eri(c, c, d, d) - ints.eri(c, d, d, c);
  }
  a.t = RMatrix(na, na);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) {
      const int p = active[i], q = active[j];
      double v = ints.t(p, q);
      for (int c : core) v += 2.0 * ints.eri(p, q, c, c) - ints.eri(p, c, c, q);
      a.t(i, j) = v;
    }
  a.g.resize(static_cast<std::size_t>(na) * na * na * na);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j)
      for (int k = 0; k < na; ++k)
        for (int l = 0; l < na; ++l) a.eri(i, j, k, l) = ints.eri(active[i], active[j], active[k], active[l]);

  sys.full_ham = cholesky_factorize(ints, chol_tol);
  return sys;
}

RMatrix to_spin_orbital(const RMatrix& spatial) {
  const auto n = spatial.rows();
  RMatrix so = RMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) {
      so(2 * p, 2 * q) = spatial(p, q);
      so(2 * p + 1, 2 * q + 1) = spatial(p, q);
    }
  return so;
}

std::uint64_t content_hash(const CholeskyHamiltonian& ham) {
  binio::Fnv1a h;
  h.update(ham.n_orb);
  h.update(ham.n_alpha);
  h.update(ham.n_beta);
  h.update(ham.e_core);
  h.update(ham.t.data(), sizeof(double) * ham.t.size());
  for (const auto& l : ham.L) h.update(l.data(), sizeof(double) * l.size());
  return h.digest();
}

namespace {
constexpr std::string_view kCholMagic = "QCHOLESK";
constexpr std::uint32_t kCholVersion = 1;
}  // namespace

void save_cholesky(const CholeskyHamiltonian& ham, const std::filesystem::path& path) {
  binio::Writer w;
  w.bytes(kCholMagic);
  w.put(kCholVersion);
  w.put<std::int32_t>(ham.n_orb);
  w.put<std::int32_t>(ham.n_alpha);
  w.put<std::int32_t>(ham.n_beta);
  w.put<std::int32_t>(ham.n_gamma());
  w.put(ham.e_core);
  w.put(ham.chol_tol);
  w.matrix(ham.t);
  for (const auto& l : ham.L) w.matrix(l);
  w.commit(path);
}

CholeskyHamiltonian load_cholesky(const std::filesystem::path& path) {
  binio::Reader r(path);
  if (r.bytes(kCholMagic.size()) != kCholMagic) throw ArchiveError(path.string() + ": not a Cholesky cache");
  if (r.get<std::uint32_t>() != kCholVersion) throw ArchiveError(path.string() + ": unsupported cache version");
  CholeskyHamiltonian ham;
  ham.n_orb = r.get<std::int32_t>();
  ham.n_alpha = r.get<std::int32_t>();
  ham.n_beta = r.get<std::int32_t>();
  const int ng = r.get<std::int32_t>();
  ham.e_core = r.get<double>();
  ham.chol_tol = r.get<double>();
  ham.t = r.rmatrix();
  ham.v0 = ham.t;
  for (int g = 0; g < ng; ++g) {
    ham.L.push_back(r.rmatrix());
    ham.v0 -= 0.5 * ham.L.back() * ham.L.back();
  }
  if (!r.at_end()) throw ArchiveError(path.string() + ": trailing bytes in Cholesky cache");
  return ham;
}

}  // namespace qcafqmc
