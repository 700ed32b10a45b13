#include "support.hpp"

namespace tdsvrg::testing {

Mdp flip_chain() {
    Mdp m;
    m.n_states = 2;
    m.P = Matrix(2, 2);
    m.P(0, 1) = 1.0;
    m.P(1, 0) = 1.0;
    m.rewards = Matrix(2, 2);
    m.rewards(0, 1) = 1.0;
    m.rewards(1, 0) = 1.0;
    m.gamma = 0.5;
    m.features = Matrix::identity(2);
    m.r_max = 1.0;
    m.id = "flip";
    return m;
}

Mdp one_state(double gamma) {
    Mdp m;
    m.n_states = 1;
    m.P = Matrix(1, 1);
    m.P(0, 0) = 1.0;
    m.rewards = Matrix(1, 1);
    m.rewards(0, 0) = 1.0;
    m.gamma = gamma;
    m.features = Matrix(1, 1);
    m.features(0, 0) = 1.0;
    m.r_max = 1.0;
    m.id = "one_state";
    return m;
}

Mdp lazy_flip() {
    Mdp m = flip_chain();
    m.P(0, 0) = 0.1;
    m.P(0, 1) = 0.9;
    m.P(1, 0) = 0.9;
    m.P(1, 1) = 0.1;
    m.rewards(0, 0) = 1.0;
    m.rewards(1, 1) = 1.0;
    m.id = "lazy_flip";
    return m;
}

Vector random_theta(std::size_t dim, double scale, Rng& rng) {
    Vector v(dim);
    for (double& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
    return v;
}

} // namespace tdsvrg::testing
