#include "tastediv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace tastediv::stats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Lentz evaluation of the incomplete-beta continued fraction; valid for
// x < (a+1)/(a+b+2), where it converges rapidly.
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 400;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("reg_incomplete_beta: continued fraction did not converge");
}

double column_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// R² of the least-squares fit of y on [1 | A]; used for VIF and for naming a
// dependent column on rank failure. A constant y counts as perfectly
// explained (it duplicates the intercept).
double aux_r2(const Eigen::VectorXd& y, const Eigen::MatrixXd& a_with_intercept) {
    const double ybar = y.mean();
    const double tss = (y.array() - ybar).matrix().squaredNorm();
    if (tss <= 0.0) return 1.0;
    const Eigen::VectorXd beta = a_with_intercept.colPivHouseholderQr().solve(y);
    const double rss = (y - a_with_intercept * beta).squaredNorm();
    return std::clamp(1.0 - rss / tss, 0.0, 1.0);
}

}  // namespace

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double reg_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("reg_incomplete_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("reg_incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    // The prefactor x^a (1-x)^b / (a B(a,b) …) is symmetric under the
    // (a,b,x) -> (b,a,1-x) reflection, so one evaluation serves both branches.
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (std::isnan(t)) return kNaN;
    if (std::isinf(t)) return 0.0;
    return reg_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double f_upper_p(double f, double df1, double df2) {
    if (std::isnan(f)) return kNaN;
    if (std::isinf(f)) return 0.0;
    if (f <= 0.0) return 1.0;
    return reg_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

std::string significance_stars(double p) {
    if (std::isnan(p)) return "";
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    if (p < 0.1) return ".";
    return "";
}

std::size_t FeatureTable::col_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
        throw std::out_of_range("feature table has no column named '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> FeatureTable::column(std::size_t c) const {
    std::vector<double> out(n_rows());
    for (std::size_t r = 0; r < n_rows(); ++r) out[r] = at(r, c);
    return out;
}

double FeatureTable::missing_fraction(std::size_t c) const {
    if (n_rows() == 0) return 0.0;
    std::size_t missing = 0;
    for (std::size_t r = 0; r < n_rows(); ++r)
        if (std::isnan(at(r, c))) ++missing;
    return static_cast<double>(missing) / static_cast<double>(n_rows());
}

FeatureTable impute_missing(const FeatureTable& table, const ImputeOptions& opt) {
    FeatureTable out = table;
    const std::size_t n = out.n_rows();
    const std::size_t k = out.n_cols();
    if (n == 0) return out;

    std::vector<std::size_t> complete;
    std::vector<std::size_t> incomplete;
    for (std::size_t c = 0; c < k; ++c) {
        const double frac = out.missing_fraction(c);
        if (frac == 0.0) {
            complete.push_back(c);
            continue;
        }
        if (frac >= opt.max_missing_frac) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.1f%% missing (limit %.1f%%)", frac * 100.0,
                          opt.max_missing_frac * 100.0);
            throw std::runtime_error("impute_missing: column '" + out.columns[c] + "' is " + buf);
        }
        incomplete.push_back(c);
    }

    for (std::size_t c : incomplete) {
        if (out.kinds[c] == ColumnKind::Factor) {
            for (std::size_t r = 0; r < n; ++r) {
                const double v = out.at(r, c);
                if (!std::isnan(v) && v != 0.0 && v != 1.0)
                    throw std::invalid_argument("impute_missing: factor column '" +
                                                out.columns[c] + "' has non-binary value");
            }
        }

        std::vector<std::size_t> obs, miss;
        for (std::size_t r = 0; r < n; ++r)
            (std::isnan(out.at(r, c)) ? miss : obs).push_back(r);

        const std::size_t p = complete.size();
        Eigen::MatrixXd xo(obs.size(), p);
        Eigen::MatrixXd xm(miss.size(), p);
        for (std::size_t i = 0; i < obs.size(); ++i)
            for (std::size_t j = 0; j < p; ++j) xo(i, j) = out.at(obs[i], complete[j]);
        for (std::size_t i = 0; i < miss.size(); ++i)
            for (std::size_t j = 0; j < p; ++j) xm(i, j) = out.at(miss[i], complete[j]);

        if (out.kinds[c] == ColumnKind::Continuous) {
            Eigen::MatrixXd a(obs.size(), p + 1);
            a.col(0).setOnes();
            a.rightCols(p) = xo;
            Eigen::VectorXd yo(obs.size());
            for (std::size_t i = 0; i < obs.size(); ++i) yo(i) = out.at(obs[i], c);
            const Eigen::VectorXd beta = a.colPivHouseholderQr().solve(yo);
            const double rss = (yo - a * beta).squaredNorm();
            const double dof = static_cast<double>(obs.size()) - static_cast<double>(p) - 1.0;
            const double rse = dof > 0.0 ? std::sqrt(std::max(0.0, rss / dof)) : 0.0;
            std::mt19937_64 rng(opt.seed + c);
            std::normal_distribution<double> noise(0.0, rse);
            for (std::size_t i = 0; i < miss.size(); ++i) {
                double fill = beta(0);
                for (std::size_t j = 0; j < p; ++j) fill += beta(j + 1) * xm(i, j);
                if (opt.add_noise && rse > 0.0) fill += noise(rng);
                out.at(miss[i], c) = fill;
            }
        } else {
            std::vector<std::size_t> class0, class1;
            for (std::size_t i = 0; i < obs.size(); ++i)
                (out.at(obs[i], c) == 1.0 ? class1 : class0).push_back(i);
            if (class0.empty() || class1.empty() || p == 0) {
                const double fill = class1.size() >= class0.size() ? 1.0 : 0.0;
                for (std::size_t r : miss) out.at(r, c) = fill;
                continue;
            }
            Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(p);
            Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(p);
            for (std::size_t i : class0) mu0 += xo.row(i).transpose();
            for (std::size_t i : class1) mu1 += xo.row(i).transpose();
            mu0 /= static_cast<double>(class0.size());
            mu1 /= static_cast<double>(class1.size());
            Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
            for (std::size_t i : class0) {
                const Eigen::VectorXd d = xo.row(i).transpose() - mu0;
                s += d * d.transpose();
            }
            for (std::size_t i : class1) {
                const Eigen::VectorXd d = xo.row(i).transpose() - mu1;
                s += d * d.transpose();
            }
            const double pool = static_cast<double>(obs.size()) - 2.0;
            if (pool > 0.0) s /= pool;

            const Eigen::VectorXd diff = mu1 - mu0;
            const Eigen::VectorXd w = s.ldlt().solve(diff);
            const bool solvable = (s * w - diff).norm() <= 1e-8 * std::max(1.0, diff.norm());
            if (!solvable) {
                const double fill = class1.size() >= class0.size() ? 1.0 : 0.0;
                for (std::size_t r : miss) out.at(r, c) = fill;
                continue;
            }
            const double prior = std::log(static_cast<double>(class1.size()) /
                                          static_cast<double>(class0.size()));
            const double cutoff = 0.5 * w.dot(mu0 + mu1) - prior;
            for (std::size_t i = 0; i < miss.size(); ++i)
                out.at(miss[i], c) = w.dot(xm.row(i).transpose()) > cutoff ? 1.0 : 0.0;
        }
    }
    return out;
}

FeatureTable standardize(const FeatureTable& table) {
    FeatureTable out = table;
    const std::size_t n = out.n_rows();
    if (n < 2) throw std::invalid_argument("standardize: need at least 2 rows");
    for (std::size_t c = 0; c < out.n_cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = out.at(r, c);
            if (std::isnan(v))
                throw std::runtime_error("standardize: column '" + out.columns[c] +
                                         "' has missing cells (impute first)");
            mean += v;
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = out.at(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n - 1);
        if (var <= 0.0)
            throw std::runtime_error("standardize: column '" + out.columns[c] +
                                     "' has zero variance");
        const double sd = std::sqrt(var);
        for (std::size_t r = 0; r < n; ++r) out.at(r, c) = (out.at(r, c) - mean) / sd;
    }
    return out;
}

std::vector<double> vif(const Design& design) {
    const std::size_t n = design.n;
    const std::size_t k = design.k;
    std::vector<double> out(k, 1.0);
    if (k < 2) return out;
    for (std::size_t j = 0; j < k; ++j) {
        Eigen::VectorXd y(n);
        Eigen::MatrixXd a(n, k);  // intercept + the other k-1 columns
        for (std::size_t r = 0; r < n; ++r) {
            y(r) = design.at(r, j);
            a(r, 0) = 1.0;
            std::size_t col = 1;
            for (std::size_t c = 0; c < k; ++c)
                if (c != j) a(r, col++) = design.at(r, c);
        }
        const double r2 = aux_r2(y, a);
        out[j] = 1.0 - r2 < 1e-12 ? kInf : 1.0 / (1.0 - r2);
    }
    return out;
}

RegressionReport ols_regress(std::span<const double> y, const Design& design) {
    const std::size_t n = design.n;
    const std::size_t k = design.k;
    if (y.size() != n) throw std::invalid_argument("ols_regress: response length mismatch");
    if (k == 0) throw std::invalid_argument("ols_regress: no predictors");
    if (n <= k + 1)
        throw std::invalid_argument("ols_regress: need more than " + std::to_string(k + 1) +
                                    " observations for " + std::to_string(k) + " predictors");

    Eigen::MatrixXd a(n, k + 1);
    a.col(0).setOnes();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < k; ++c) a(r, c + 1) = design.at(r, c);
    Eigen::VectorXd yv(n);
    for (std::size_t r = 0; r < n; ++r) yv(r) = y[r];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    std::vector<double> vifs = vif(design);
    if (qr.rank() < static_cast<Eigen::Index>(k + 1)) {
        // Name the most collinear predictor so the caller can fix the design.
        std::size_t worst = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (vifs[j] > vifs[worst]) worst = j;
        throw std::runtime_error("ols_regress: predictor '" + design.names[worst] +
                                 "' is linearly dependent on the others");
    }

    const Eigen::VectorXd beta = qr.solve(yv);
    const Eigen::VectorXd resid = yv - a * beta;
    const double rss = resid.squaredNorm();
    const double ybar = yv.mean();
    const double tss = (yv.array() - ybar).matrix().squaredNorm();

    RegressionReport rep;
    rep.n = n;
    rep.df1 = k;
    rep.df2 = n - k - 1;
    const double df2 = static_cast<double>(rep.df2);
    rep.rse = std::sqrt(rss / df2);
    rep.degenerate_response = tss <= 0.0;
    if (rep.degenerate_response) {
        rep.r2 = 0.0;
        rep.adj_r2 = 0.0;
        rep.f_stat = kNaN;
        rep.f_p = kNaN;
    } else {
        rep.r2 = 1.0 - rss / tss;
        rep.adj_r2 = 1.0 - (1.0 - rep.r2) * static_cast<double>(n - 1) / df2;
        if (rss <= 0.0) {
            rep.f_stat = kInf;
            rep.f_p = 0.0;
        } else {
            rep.f_stat = (rep.r2 / static_cast<double>(k)) / ((1.0 - rep.r2) / df2);
            rep.f_p = f_upper_p(rep.f_stat, static_cast<double>(k), df2);
        }
    }

    const Eigen::MatrixXd gram_inv =
        (a.transpose() * a).ldlt().solve(Eigen::MatrixXd::Identity(k + 1, k + 1));
    rep.predictors.reserve(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
        PredictorStats ps;
        ps.name = i == 0 ? "(intercept)" : design.names[i - 1];
        ps.coef = beta(static_cast<Eigen::Index>(i));
        ps.se = rep.rse * std::sqrt(std::max(0.0, gram_inv(i, i)));
        if (ps.se > 0.0) {
            ps.t = ps.coef / ps.se;
        } else {
            ps.t = ps.coef == 0.0 ? 0.0 : std::copysign(kInf, ps.coef);
        }
        ps.p = rep.degenerate_response ? kNaN : student_t_two_sided_p(ps.t, df2);
        ps.stars = significance_stars(ps.p);
        ps.vif = i == 0 ? kNaN : vifs[i - 1];
        rep.predictors.push_back(std::move(ps));
    }
    return rep;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("pearson: need at least 3 observations");
    const double mx = column_mean(x);
    const double my = column_mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0) throw std::domain_error("pearson: first input is constant");
    if (syy <= 0.0) throw std::domain_error("pearson: second input is constant");

    PearsonResult res;
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double denom = 1.0 - res.r * res.r;
    if (denom <= 0.0) {
        res.t = std::copysign(kInf, res.r);
        res.p = 0.0;
        return res;
    }
    res.t = res.r * std::sqrt(static_cast<double>(n - 2) / denom);
    res.p = student_t_two_sided_p(res.t, static_cast<double>(n - 2));
    return res;
}

KappaResult fleiss_kappa(const std::vector<std::vector<int>>& ratings) {
    const std::size_t n = ratings.size();
    if (n < 2) throw std::invalid_argument("fleiss_kappa: need at least 2 subjects");
    const std::size_t m = ratings.front().size();
    if (m < 2) throw std::invalid_argument("fleiss_kappa: need at least 2 raters");
    for (const auto& row : ratings)
        if (row.size() != m) throw std::invalid_argument("fleiss_kappa: ragged ratings grid");

    std::map<int, std::size_t> cat_index;
    for (const auto& row : ratings)
        for (int v : row) cat_index.emplace(v, cat_index.size());

    const std::size_t q = cat_index.size();
    std::vector<double> p_cat(q, 0.0);
    double p_bar = 0.0;
    std::vector<std::size_t> counts(q);
    for (const auto& row : ratings) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int v : row) ++counts[cat_index[v]];
        double agree = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            agree += static_cast<double>(counts[j]) * static_cast<double>(counts[j]);
            p_cat[j] += static_cast<double>(counts[j]);
        }
        p_bar += (agree - static_cast<double>(m)) /
                 (static_cast<double>(m) * static_cast<double>(m - 1));
    }
    p_bar /= static_cast<double>(n);
    double p_e = 0.0;
    for (double& pj : p_cat) {
        pj /= static_cast<double>(n) * static_cast<double>(m);
        p_e += pj * pj;
    }

    if (1.0 - p_e < 1e-12) return {1.0, true};
    return {(p_bar - p_e) / (1.0 - p_e), false};
}

KappaResult cohen_kappa(std::span<const int> rater_a, std::span<const int> rater_b) {
    if (rater_a.size() != rater_b.size())
        throw std::invalid_argument("cohen_kappa: length mismatch");
    const std::size_t n = rater_a.size();
    if (n == 0) throw std::invalid_argument("cohen_kappa: empty ratings");

    std::map<int, double> marg_a, marg_b;
    double agree = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        marg_a[rater_a[i]] += 1.0;
        marg_b[rater_b[i]] += 1.0;
        if (rater_a[i] == rater_b[i]) agree += 1.0;
    }
    const double p_o = agree / static_cast<double>(n);
    double p_e = 0.0;
    for (const auto& [cat, ca] : marg_a) {
        const auto it = marg_b.find(cat);
        if (it != marg_b.end())
            p_e += (ca / static_cast<double>(n)) * (it->second / static_cast<double>(n));
    }
    if (1.0 - p_e < 1e-12) return {1.0, true};
    return {(p_o - p_e) / (1.0 - p_e), false};
}

KappaResult cohen_kappa_avg(const std::vector<std::vector<int>>& ratings) {
    const std::size_t n = ratings.size();
    if (n < 2) throw std::invalid_argument("cohen_kappa_avg: need at least 2 subjects");
    const std::size_t m = ratings.front().size();
    if (m < 2) throw std::invalid_argument("cohen_kappa_avg: need at least 2 raters");
    for (const auto& row : ratings)
        if (row.size() != m) throw std::invalid_argument("cohen_kappa_avg: ragged ratings grid");

    std::vector<std::vector<int>> by_rater(m, std::vector<int>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) by_rater[j][i] = ratings[i][j];

    double sum = 0.0;
    std::size_t pairs = 0;
    bool degenerate = false;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const KappaResult kr = cohen_kappa(by_rater[a], by_rater[b]);
            sum += kr.kappa;
            degenerate = degenerate || kr.degenerate;
            ++pairs;
        }
    }
    return {sum / static_cast<double>(pairs), degenerate};
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw std::invalid_argument("one_way_anova: need at least 2 groups");
    std::size_t n = 0;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2)
            throw std::invalid_argument("one_way_anova: every group needs at least 2 values");
        for (double v : g) grand += v;
        n += g.size();
    }
    grand /= static_cast<double>(n);

    double ssb = 0.0, ssw = 0.0;
    for (const auto& g : groups) {
        const double mean = column_mean(g);
        ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
        for (double v : g) ssw += (v - mean) * (v - mean);
    }

    AnovaResult res;
    res.df_between = groups.size() - 1;
    res.df_within = n - groups.size();
    if (ssw <= 0.0 && ssb <= 0.0) {
        res.f = 0.0;
        res.p = 1.0;
        res.degenerate = true;
        return res;
    }
    if (ssw <= 0.0) {
        res.f = kInf;
        res.p = 0.0;
        return res;
    }
    res.f = (ssb / static_cast<double>(res.df_between)) /
            (ssw / static_cast<double>(res.df_within));
    res.p = f_upper_p(res.f, static_cast<double>(res.df_between),
                      static_cast<double>(res.df_within));
    return res;
}

}  // namespace tastediv::stats
