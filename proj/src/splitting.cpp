#include "slab/spectra.hpp"

#include <Eigen/SVD>

namespace slab {

SingularValueProfile ac_splitting_profile(const Problem& pb, const std::vector<double>& k,
                                          double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta", "requires 0 < beta < 1");
  SingularValueProfile prof;
  prof.k = k;
  const Eigen::Index n = pb.dim();
  for (double kk : k) {
    Eigen::MatrixXcd s;
    if (pb.profile.is_zero()) {
      s = Eigen::MatrixXcd::Identity(n, n);
    } else if (kk == 0.0) {
      s = s_zero(pb, admissible_delta(pb.profile, pb.kernel)).value;
    } else {
      s = char_fn(cplx(kk, 0.0), pb).value.entries;
    }
    Eigen::VectorXd sv = n > 0 ? Eigen::VectorXd(Eigen::BDCSVD<Eigen::MatrixXcd>(s).singularValues())
                               : Eigen::VectorXd();
    // Eigenvalues of D(k) = S^* S are the squared singular values.
    int x1 = 0, ker = 0, delta = 0;
    const double top = sv.size() ? sv[0] : 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      const double d = sv[i] * sv[i];
      if (d < beta * beta) ++x1;
      if (sv[i] < kernel_threshold * top) ++ker;
      if (d < 1.0 - 1e-6) ++delta;
    }
    prof.svals.push_back(std::move(sv));
    prof.x1_dim.push_back(x1);
    prof.ker_dim.push_back(ker);
    prof.delta_rank.push_back(delta);
    prof.max_ker_dim = std::max(prof.max_ker_dim, ker);
    prof.max_x1_dim = std::max(prof.max_x1_dim, x1);
  }
  return prof;
}

}  // namespace slab
