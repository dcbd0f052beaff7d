#pragma once

// Discrete geometry on a uniform staggered (MAC) rectangle: cell-centered
// scalars, face-normal velocity components, divergence / gradient / strain
// stencils, discrete norms, and the numerically estimated embedding constants
// feeding the decay rates.
//
// Boundary conventions used throughout:
//   * normal velocity components live on boundary faces and are pinned to 0;
//   * tangential components get reflection ghosts (wall value 0), which makes
//     one-sided wall derivatives 2 u / h;
//   * cell-centered Dirichlet scalars use half-cell wall fluxes 2 (g - w) / h.

#include "nsfd/constitutive.hpp"
#include "nsfd/errors.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nsfd {

/// Uniform rectangular domain split into nx * ny cells.
struct Domain {
    double Lx = 1.0;
    double Ly = 1.0;
    int nx = 0;
    int ny = 0;

    Domain() = default;
    Domain(double lx, double ly, int nx_, int ny_);

    double hx() const { return Lx / nx; }
    double hy() const { return Ly / ny; }
    double cell_area() const { return hx() * hy(); }
    double area() const { return Lx * Ly; }
    double cell_x(int i) const { return (i + 0.5) * hx(); }
    double cell_y(int j) const { return (j + 0.5) * hy(); }

    bool operator==(const Domain&) const = default;
};

/// Plain row-major 2-D array of doubles.
class Array2 {
public:
    Array2() = default;
    Array2(int nx, int ny, double fill = 0.0)
        : nx_(nx), ny_(ny), a_(static_cast<std::size_t>(nx) * ny, fill) {}

    double& operator()(int i, int j) { return a_[idx(i, j)]; }
    double operator()(int i, int j) const { return a_[idx(i, j)]; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::span<double> data() { return a_; }
    std::span<const double> data() const { return a_; }

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(i);
    }
    int nx_ = 0, ny_ = 0;
    std::vector<double> a_;
};

/// Cell-centered scalar field.
struct ScalarField {
    Domain dom;
    Array2 cells;

    ScalarField() = default;
    explicit ScalarField(const Domain& d, double fill = 0.0) : dom(d), cells(d.nx, d.ny, fill) {}
    double& operator()(int i, int j) { return cells(i, j); }
    double operator()(int i, int j) const { return cells(i, j); }
};

/// Staggered velocity: u on vertical faces ((nx+1) x ny), v on horizontal
/// faces (nx x (ny+1)). Faces on the boundary carry the (zero) normal trace.
struct VectorField {
    Domain dom;
    Array2 ufaces; // u(i, j), i in [0, nx], j in [0, ny-1]
    Array2 vfaces; // v(i, j), i in [0, nx-1], j in [0, ny]

    VectorField() = default;
    explicit VectorField(const Domain& d)
        : dom(d), ufaces(d.nx + 1, d.ny, 0.0), vfaces(d.nx, d.ny + 1, 0.0) {}
    double& u(int i, int j) { return ufaces(i, j); }
    double u(int i, int j) const { return ufaces(i, j); }
    double& v(int i, int j) { return vfaces(i, j); }
    double v(int i, int j) const { return vfaces(i, j); }
};

/// Cell-centered symmetric tensor field.
struct SymTensorField {
    Domain dom;
    Array2 xx, xy, yy;

    SymTensorField() = default;
    explicit SymTensorField(const Domain& d)
        : dom(d), xx(d.nx, d.ny, 0.0), xy(d.nx, d.ny, 0.0), yy(d.nx, d.ny, 0.0) {}
    SymTensor2 at(int i, int j) const { return {xx(i, j), xy(i, j), yy(i, j)}; }
};

/// MAC strain rate: diagonal components at cells, shear at nodes
/// ((nx+1) x (ny+1)), with no-slip reflection ghosts at the walls.
struct StrainRate {
    Domain dom;
    Array2 dxx, dyy;  // cells
    Array2 dxy_node;  // nodes

    StrainRate() = default;
    explicit StrainRate(const Domain& d)
        : dom(d), dxx(d.nx, d.ny, 0.0), dyy(d.nx, d.ny, 0.0),
          dxy_node(d.nx + 1, d.ny + 1, 0.0) {}
};

/// Stress on the same staggering as StrainRate.
struct MacStress {
    Domain dom;
    Array2 sxx, syy; // cells
    Array2 sxy_node; // nodes

    MacStress() = default;
    explicit MacStress(const Domain& d)
        : dom(d), sxx(d.nx, d.ny, 0.0), syy(d.nx, d.ny, 0.0),
          sxy_node(d.nx + 1, d.ny + 1, 0.0) {}
};

// --------------------------------------------------------------------------
// Stencils

/// Centered MAC divergence (exact for linear fields).
ScalarField divergence(const VectorField& v);

/// Strain rate on the MAC staggering (no-slip reflection ghosts at walls).
StrainRate mac_strain(const VectorField& v);

/// Cell-centered symmetric gradient; the shear component is the average of
/// the four surrounding node values of mac_strain. Exact for affine fields in
/// the interior (wall rows see the no-slip ghosts).
SymTensorField sym_gradient(const VectorField& v);

/// Discrete tensor pairing sum(S_xx R_xx + S_yy R_yy) * a over cells plus
/// sum(2 S_xy R_xy) * a over nodes. stress_divergence below is its exact
/// negative adjoint on no-slip velocity fields.
double strain_inner_product(const MacStress& s, const StrainRate& r);

/// div S on interior faces, adjoint to strain_inner_product: for all no-slip
/// w, face_dot(stress_divergence(S), w) == -strain_inner_product(S, mac_strain(w)).
VectorField stress_divergence(const MacStress& s);

/// Face-weighted inner product over interior faces (boundary faces carry the
/// pinned zero normal trace and drop out).
double face_dot(const VectorField& a, const VectorField& b);

// --------------------------------------------------------------------------
// Norms (midpoint-rule discrete integrals)

double l1_norm(const ScalarField& f);
double l2_norm(const ScalarField& f);
double lp_norm(const ScalarField& f, double p);
double linf_norm(const ScalarField& f);
/// Face-based L2 norm, consistent with face_dot.
double l2_norm(const VectorField& v);
double linf_norm(const VectorField& v);
/// Cell-based Lp norm of |T|.
double lp_norm(const SymTensorField& t, double p);

double min_value(const ScalarField& f);
double max_value(const ScalarField& f);
bool all_finite(const ScalarField& f);
bool all_finite(const VectorField& v);

/// Integral of f over the domain (midpoint rule).
double integral(const ScalarField& f);

// --------------------------------------------------------------------------
// Dirichlet Laplacian machinery (cell-centered, half-cell walls)

/// y = -Laplace(x) with homogeneous Dirichlet walls (factor-2 one-sided wall
/// fluxes); SPD.
void apply_dirichlet_laplacian(const Domain& dom, std::span<const double> x,
                               std::span<double> y);

/// Smallest eigenvalue of the discrete Dirichlet Laplacian by inverse power
/// iteration (CG inner solves), relative tolerance rel_tol. Also returns the
/// eigenfunction.
struct EigenResult {
    double lambda = 0.0;
    ScalarField mode;
    int iterations = 0;
};
EigenResult smallest_dirichlet_eigenvalue(const Domain& dom, double rel_tol = 1e-8);

/// mu = kappa_lo * lambda_1(domain): the exponential kinetic decay rate of
/// the no-slip velocity field for delta = 1, p >= 2. Throws UnsupportedRegime
/// for p < 2 (that regime decays polynomially; see the appendix-b path).
double estimate_mu(const Domain& dom, const FluidParams& params);

/// Discrete best constant (over a fixed probe family: eigenfunction plus
/// seeded smooth random combinations) in ||w||_q <= C ||grad w||_2 for
/// zero-trace scalars. A lower estimate of the true constant.
double estimate_embedding_constant(const Domain& dom, double q);

/// Spec surface: q = 2 / (1 - alpha), alpha in (1/2, 2/3].
double estimate_sobolev_constant(const Domain& dom, double alpha);

/// ||grad w||_2^2 = w^T (-Laplace w) * cell_area for zero-trace w.
double dirichlet_gradient_norm_sq(const ScalarField& w);

} // namespace nsfd
