#include "coopgrow/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coopgrow {

namespace {

using Vec = std::vector<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const Vec& a, const Vec& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

class Problem {
public:
    Problem(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi, double step)
        : f_(f), lo_(lo), hi_(hi), step_(step)
    {
    }

    double value(const Vec& x)
    {
        ++evaluations;
        double v;
        try {
            v = f_(x);
        } catch (const std::exception&) {
            return kInf;
        }
        return std::isfinite(v) ? v : kInf;
    }

    Vec gradient(const Vec& x)
    {
        Vec g(x.size());
        Vec probe = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double up = std::min(x[i] + step_, hi_[i]);
            const double down = std::max(x[i] - step_, lo_[i]);
            probe[i] = up;
            const double fu = value(probe);
            probe[i] = down;
            const double fd = value(probe);
            probe[i] = x[i];
            g[i] = (std::isfinite(fu) && std::isfinite(fd) && up > down) ? (fu - fd) / (up - down) : 0.0;
        }
        return g;
    }

    Vec project(Vec x) const
    {
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = std::clamp(x[i], lo_[i], hi_[i]);
        }
        return x;
    }

    // A coordinate is active when it sits on a bound and the gradient pushes outwards.
    std::vector<bool> active(const Vec& x, const Vec& g) const
    {
        std::vector<bool> a(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double eps = 1e-12 * std::max(1.0, std::abs(x[i]));
            a[i] = (x[i] <= lo_[i] + eps && g[i] > 0.0) || (x[i] >= hi_[i] - eps && g[i] < 0.0);
        }
        return a;
    }

    double projected_gradient_norm(const Vec& x, const Vec& g) const
    {
        double m = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            m = std::max(m, std::abs(std::clamp(x[i] - g[i], lo_[i], hi_[i]) - x[i]));
        }
        return m;
    }

    std::size_t evaluations = 0;

private:
    const std::function<double(const Vec&)>& f_;
    const Vec& lo_;
    const Vec& hi_;
    double step_;
};

using Mat = std::vector<Vec>;

Mat identity(std::size_t n)
{
    Mat m(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] = 1.0;
    }
    return m;
}

}  // namespace

BoxResult minimize_box(const std::function<double(const Vec&)>& f, Vec x0, const Vec& lower, const Vec& upper,
                       const BoxOptions& options)
{
    const std::size_t n = x0.size();
    if (lower.size() != n || upper.size() != n) {
        throw std::invalid_argument("minimize_box: bound dimensions do not match x0");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lower[i] <= upper[i])) {
            throw std::invalid_argument("minimize_box: lower bound above upper bound");
        }
    }

    Problem prob(f, lower, upper, options.fd_step);
    BoxResult res;
    res.x = prob.project(std::move(x0));
    res.value = prob.value(res.x);
    if (!std::isfinite(res.value)) {
        throw std::runtime_error("objective is not finite at the starting point");
    }
    if (n == 0 || res.value <= options.objective_floor) {
        res.converged = true;
        res.evaluations = prob.evaluations;
        return res;
    }

    Vec g = prob.gradient(res.x);
    Mat H = identity(n);
    bool fresh_hessian = true;
    std::size_t stalls = 0;

    for (res.iterations = 0; res.iterations < options.max_iterations;) {
        if (prob.projected_gradient_norm(res.x, g) <= options.gradient_tolerance ||
            res.value <= options.objective_floor) {
            res.converged = true;
            break;
        }
        const std::vector<bool> act = prob.active(res.x, g);

        Vec d(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (act[i]) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (!act[j]) {
                    d[i] -= H[i][j] * g[j];
                }
            }
        }
        if (!(dot(d, g) < 0.0)) {
            H = identity(n);
            fresh_hessian = true;
            for (std::size_t i = 0; i < n; ++i) {
                d[i] = act[i] ? 0.0 : -g[i];
            }
        }

        // Backtracking on the projected path.
        double alpha = 1.0;
        Vec x_new;
        double f_new = kInf;
        bool accepted = false;
        for (int k = 0; k < 60; ++k, alpha *= 0.5) {
            x_new = res.x;
            for (std::size_t i = 0; i < n; ++i) {
                x_new[i] += alpha * d[i];
            }
            x_new = prob.project(std::move(x_new));
            Vec step(n);
            for (std::size_t i = 0; i < n; ++i) {
                step[i] = x_new[i] - res.x[i];
            }
            f_new = prob.value(x_new);
            if (std::isfinite(f_new) && f_new <= res.value + 1e-4 * dot(g, step) && f_new < res.value) {
                accepted = true;
                break;
            }
        }
        ++res.iterations;
        if (!accepted) {
            if (fresh_hessian) {
                break;
            }
            H = identity(n);
            fresh_hessian = true;
            continue;
        }

        const Vec g_new = prob.gradient(x_new);
        Vec s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - res.x[i];
            y[i] = g_new[i] - g[i];
        }
        const double decrease = res.value - f_new;
        const double previous = res.value;
        res.x = x_new;
        res.value = f_new;
        g = g_new;

        const double sy = dot(s, y);
        if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
            if (fresh_hessian) {
                const double scale = sy / dot(y, y);
                H = identity(n);
                for (std::size_t i = 0; i < n; ++i) {
                    H[i][i] = scale;
                }
                fresh_hessian = false;
            }
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            const double rho = 1.0 / sy;
            Vec Hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    Hy[i] += H[i][j] * y[j];
                }
            }
            const double yHy = dot(y, Hy);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    H[i][j] += -rho * (s[i] * Hy[j] + Hy[i] * s[j]) + (rho * rho * yHy + rho) * s[i] * s[j];
                }
            }
        }

        if (decrease <= options.relative_tolerance * std::abs(previous)) {
            if (++stalls >= 2) {
                res.converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    res.evaluations = prob.evaluations;
    return res;
}

}  // namespace coopgrow
