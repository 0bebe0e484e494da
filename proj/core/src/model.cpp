#include "trajstat/model.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trajstat/errors.hpp"

namespace trajstat {

using json = nlohmann::json;

namespace {

Mat parse_complex_matrix(const json& j, int rows, int cols,
                         const std::string& what) {
  if (!j.is_object() || !j.contains("re") || !j.contains("im"))
    throw ParseError(what + ": expected object with \"re\" and \"im\" arrays");
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (!re.is_array() || !im.is_array() ||
      static_cast<int>(re.size()) != rows ||
      static_cast<int>(im.size()) != rows)
    throw ParseError(what + ": wrong number of rows");
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(re[r].size()) != cols ||
        static_cast<int>(im[r].size()) != cols)
      throw ParseError(what + ": wrong number of columns in row " +
                       std::to_string(r));
    for (int c = 0; c < cols; ++c)
      m(r, c) = Cplx(re[r][c].get<double>(), im[r][c].get<double>());
  }
  return m;
}

CVec parse_complex_vector(const json& j, int n, const std::string& what) {
  if (!j.is_object() || !j.contains("re") || !j.contains("im"))
    throw ParseError(what + ": expected object with \"re\" and \"im\" arrays");
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (static_cast<int>(re.size()) != n || static_cast<int>(im.size()) != n)
    throw ParseError(what + ": wrong length");
  CVec v(n);
  for (int i = 0; i < n; ++i)
    v(i) = Cplx(re[i].get<double>(), im[i].get<double>());
  return v;
}

json dump_complex_matrix(const Mat& m) {
  json re = json::array(), im = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json rre = json::array(), rim = json::array();
    for (int c = 0; c < m.cols(); ++c) {
      rre.push_back(m(r, c).real());
      rim.push_back(m(r, c).imag());
    }
    re.push_back(rre);
    im.push_back(rim);
  }
  return {{"re", re}, {"im", im}};
}

json dump_complex_vector(const CVec& v) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

}  // namespace

LindbladModel LindbladModel::make(Mat hamiltonian,
                                  std::vector<JumpChannel> jumps,
                                  CVec initial_state) {
  const int d = static_cast<int>(hamiltonian.rows());
  if (d < 1 || hamiltonian.cols() != d)
    throw ValidationError("hamiltonian must be a square d x d matrix, d >= 1");
  if ((hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff() > kHermTol)
    throw ValidationError("hamiltonian is not Hermitian to tolerance 1e-12");
  if (initial_state.size() != d)
    throw ValidationError("initial_state dimension does not match dim");
  if (std::abs(initial_state.norm() - 1.0) > kNormTol)
    throw ValidationError("initial_state is not unit-norm to tolerance 1e-12");
  if (jumps.empty()) throw ValidationError("at least one jump operator required");
  const int p = static_cast<int>(jumps.front().spin.size());
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    if (jumps[i].op.rows() != d || jumps[i].op.cols() != d)
      throw ValidationError("jump operator " + std::to_string(i) +
                            " has wrong dimensions");
    if (static_cast<int>(jumps[i].spin.size()) != p)
      throw ValidationError("spin labels must all share the same length");
  }
  LindbladModel m;
  m.hamiltonian_ = std::move(hamiltonian);
  m.jumps_ = std::move(jumps);
  m.initial_state_ = std::move(initial_state);
  m.spin_dim_ = p;
  // Stability sanity check: x_min <= 0 always, since exp(-it H_eff) is a
  // contraction. A positive value signals a corrupted model.
  if (effective_hamiltonian(m).x_min > 1e-10)
    throw ValidationError("x_min > 0: effective Hamiltonian is not contractive");
  return m;
}

LindbladModel LindbladModel::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  }
  int d = 0;
  try {
    d = j.at("dim").get<int>();
  } catch (const json::exception&) {
    throw ParseError("model JSON missing integer \"dim\"");
  }
  if (d < 1) throw ParseError("dim must be >= 1");
  if (!j.contains("hamiltonian") || !j.contains("jumps") ||
      !j.contains("initial_state"))
    throw ParseError("model JSON requires hamiltonian, jumps, initial_state");

  Mat H = parse_complex_matrix(j.at("hamiltonian"), d, d, "hamiltonian");
  std::vector<JumpChannel> jumps;
  for (const auto& je : j.at("jumps")) {
    JumpChannel ch;
    ch.op = parse_complex_matrix(je, d, d, "jump");
    if (je.contains("spin")) {
      const auto& sp = je.at("spin");
      ch.spin = RVec(sp.size());
      for (std::size_t k = 0; k < sp.size(); ++k)
        ch.spin(static_cast<int>(k)) = sp[k].get<double>();
    } else {
      ch.spin = RVec(0);
    }
    jumps.push_back(std::move(ch));
  }
  CVec psi = parse_complex_vector(j.at("initial_state"), d, "initial_state");
  return make(std::move(H), std::move(jumps), std::move(psi));
}

LindbladModel LindbladModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

Mat LindbladModel::dissipation_sum() const {
  Mat D = Mat::Zero(dim(), dim());
  for (const auto& ch : jumps_) D += ch.op.adjoint() * ch.op;
  return D;
}

std::string LindbladModel::to_json_text() const {
  json j;
  j["dim"] = dim();
  j["hamiltonian"] = dump_complex_matrix(hamiltonian_);
  json jl = json::array();
  for (const auto& ch : jumps_) {
    json je = dump_complex_matrix(ch.op);
    json sp = json::array();
    for (int k = 0; k < ch.spin.size(); ++k) sp.push_back(ch.spin(k));
    je["spin"] = sp;
    jl.push_back(je);
  }
  j["jumps"] = jl;
  j["initial_state"] = dump_complex_vector(initial_state_);
  return j.dump();
}

std::uint64_t LindbladModel::hash() const {
  const std::string s = to_json_text();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

EffectiveHamiltonian effective_hamiltonian(const LindbladModel& model) {
  EffectiveHamiltonian eff;
  eff.matrix = model.hamiltonian() - Cplx(0, 0.5) * model.dissipation_sum();
  Eigen::ComplexEigenSolver<Mat> es(eff.matrix, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw EigensolverFailure("eigendecomposition of H_eff did not converge");
  eff.eigenvalues = es.eigenvalues();
  double max_im = eff.eigenvalues(0).imag();
  for (int i = 1; i < eff.eigenvalues.size(); ++i)
    max_im = std::max(max_im, eff.eigenvalues(i).imag());
  eff.x_min = 2.0 * max_im;
  return eff;
}

LindbladModel apply_phase_transform(const LindbladModel& model, PhaseKind kind,
                                    double phi) {
  Mat H = model.hamiltonian();
  std::vector<JumpChannel> jumps = model.jumps();
  if (kind == PhaseKind::P1) {
    const Cplx factor = std::exp(Cplx(0, phi));
    for (auto& ch : jumps) ch.op *= factor;
  } else {
    H += phi * Mat::Identity(model.dim(), model.dim());
  }
  return LindbladModel::make(std::move(H), std::move(jumps),
                             model.initial_state());
}

LindbladModel two_level_decay(double kappa) {
  Mat H = Mat::Zero(2, 2);
  JumpChannel ch;
  ch.op = Mat::Zero(2, 2);
  ch.op(0, 1) = std::sqrt(kappa);
  ch.spin = RVec(0);
  CVec psi = CVec::Zero(2);
  psi(1) = 1.0;
  return LindbladModel::make(std::move(H), {std::move(ch)}, std::move(psi));
}

LindbladModel three_level_renewal(double omega1, double omega2, double kappa) {
  Mat H = Mat::Zero(3, 3);
  H(0, 1) = H(1, 0) = omega1;
  H(0, 2) = H(2, 0) = omega2;
  JumpChannel ch;
  ch.op = Mat::Zero(3, 3);
  ch.op(0, 1) = std::sqrt(kappa);
  ch.spin = RVec(0);
  CVec psi = CVec::Zero(3);
  psi(0) = 1.0;
  return LindbladModel::make(std::move(H), {std::move(ch)}, std::move(psi));
}

}  // namespace trajstat
