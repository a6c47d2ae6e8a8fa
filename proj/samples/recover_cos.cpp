// Recover q(x) = cos x from 64 eigenpairs with beta = pi/3 and print both on a coarse grid.

#include <cmath>
#include <cstdio>

#include "islp/forward.hpp"
#include "islp/inverse.hpp"

using namespace islp;

int main()
{
    const BoundaryAngle beta(pi / 3);
    const Potential q = Potential::sample(make_grid(1025, RuleKind::uniform_simpson), [](double x) { return std::cos(x); });

    const SpectralData data = ForwardSolver(q).spectral_data(beta, 64);
    std::printf("mu_0 = %.10f  mu_1 = %.10f  c = %.3e\n", data.mu[0], data.mu[1], data.c_fit);

    const InverseResult r = solve_inverse(data);
    std::printf("beta~ = %.8f  cot beta~ = %.8f  (cot beta = %.8f)\n", r.beta.beta_tilde, r.beta.cot_beta_tilde,
                beta.cot());

    const Grid& g = r.q.q.grid();
    std::printf("%8s %12s %12s\n", "x", "cos x", "q^(x)");
    for (std::size_t i = 0; i < g.size(); i += 16)
        std::printf("%8.4f %12.6f %12.6f\n", g.node(i), std::cos(g.node(i)), r.q.q.values()[i]);
}
