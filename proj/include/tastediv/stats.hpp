#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tastediv::stats {

// ---------------------------------------------------------------------------
// p-value kernels
// ---------------------------------------------------------------------------

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction,
// absolute error below 1e-10. Throws std::domain_error outside a, b > 0 and
// x in [0, 1].
double reg_incomplete_beta(double a, double b, double x);

// Two-sided p for a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Upper-tail p for an F statistic with (df1, df2) degrees of freedom.
double f_upper_p(double f, double df1, double df2);

// Significance tier for a p value: "***" < 0.001, "**" < 0.01, "*" < 0.05,
// "." < 0.1, "" otherwise.
std::string significance_stars(double p);

// ---------------------------------------------------------------------------
// Feature tables
// ---------------------------------------------------------------------------

enum class ColumnKind { Continuous, Factor };

// Dense table of named variables; NaN marks a missing cell. Factor columns
// hold binary 0/1 indicators when present.
struct FeatureTable {
    std::vector<std::string> row_ids;
    std::vector<std::string> columns;
    std::vector<ColumnKind> kinds;  // parallel to columns
    std::vector<double> values;     // rows x columns, row-major

    std::size_t n_rows() const { return row_ids.size(); }
    std::size_t n_cols() const { return columns.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * n_cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * n_cols() + c]; }
    std::size_t col_index(const std::string& name) const;  // throws when absent
    std::vector<double> column(std::size_t c) const;
    double missing_fraction(std::size_t c) const;
};

struct ImputeOptions {
    double max_missing_frac = 0.10;  // fractions at or above this are an error
    bool add_noise = false;          // residual-scaled gaussian noise on fills
    std::uint64_t seed = 0;
};

// Fill missing cells from the complete columns: least-squares predictions for
// continuous columns, a two-class linear discriminant for factor columns.
// Deterministic unless add_noise is set. Throws when a column's missing
// fraction reaches max_missing_frac, naming the column and its fraction.
FeatureTable impute_missing(const FeatureTable& table, const ImputeOptions& opt = {});

// Center every column to mean 0 and scale to sample (n-1) standard deviation
// 1. Requires no missing cells; throws on a zero-variance column, naming it.
FeatureTable standardize(const FeatureTable& table);

// ---------------------------------------------------------------------------
// Regression
// ---------------------------------------------------------------------------

struct PredictorStats {
    std::string name;
    double coef = 0.0;
    double se = 0.0;
    double t = 0.0;
    double p = 1.0;
    std::string stars;
    double vif = 0.0;  // NaN for the intercept; +inf on perfect collinearity
};

struct RegressionReport {
    std::vector<PredictorStats> predictors;  // "(intercept)" first
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double rse = 0.0;
    double f_stat = 0.0;
    double f_p = 1.0;
    std::size_t df1 = 0;  // k
    std::size_t df2 = 0;  // n - k - 1
    std::size_t n = 0;
    bool degenerate_response = false;  // constant y: R² forced to 0, F undefined
};

// Predictor block: n x k column-named design (no intercept column; one is
// added internally).
struct Design {
    std::vector<std::string> names;
    std::vector<double> x;  // n x k row-major
    std::size_t n = 0;
    std::size_t k = 0;

    double at(std::size_t r, std::size_t c) const { return x[r * k + c]; }
};

// Least-squares fit with an intercept via column-pivoted QR. Standard errors
// come from the residual variance and the inverse Gram matrix; p values from
// the t distribution with n-k-1 degrees of freedom. Throws on n <= k+1 and on
// rank deficiency (naming a dependent column; use vif() to diagnose instead).
RegressionReport ols_regress(std::span<const double> y, const Design& design);

// VIF_j = 1 / (1 - R²_j) from regressing column j on the remaining columns.
// Perfect collinearity yields +inf rather than an error.
std::vector<double> vif(const Design& design);

// ---------------------------------------------------------------------------
// Agreement statistics
// ---------------------------------------------------------------------------

struct PearsonResult {
    double r = 0.0;
    double t = 0.0;
    double p = 1.0;
};

// Sample correlation with t = r sqrt((n-2)/(1-r²)) and a two-sided p value.
// Throws on length mismatch, n < 3, or a constant input.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

struct KappaResult {
    double kappa = 0.0;
    bool degenerate = false;  // expected agreement 1: kappa reported as 1
};

// Ratings grid: one row per subject, one column per rater, small integer
// category codes. All rows must have the same width (>= 2 raters).
KappaResult fleiss_kappa(const std::vector<std::vector<int>>& ratings);
KappaResult cohen_kappa(std::span<const int> rater_a, std::span<const int> rater_b);
KappaResult cohen_kappa_avg(const std::vector<std::vector<int>>& ratings);

struct AnovaResult {
    double f = 0.0;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
    double p = 1.0;
    bool degenerate = false;  // no variance anywhere
};

// One-way between/within decomposition; requires >= 2 groups of size >= 2.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

}  // namespace tastediv::stats
