#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "notefeat/table.hpp"

namespace notefeat {

struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a; // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

struct LabeledMatrix {
    Matrix X;
    std::vector<std::string> y;
    std::vector<std::string> feature_names;
    std::vector<std::string> ids;
};

struct EvalResult {
    std::map<std::string, double> per_model; // model name -> balanced accuracy
    std::string best;
    int folds = 0;
    std::uint32_t seed = 0;
};

struct StandardizeResult {
    Matrix transformed;
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<std::size_t> kept_columns;    // indices into the input columns
    std::vector<std::size_t> dropped_columns; // constant columns
};

struct PcaResult {
    Matrix scores;                  // n x k
    Matrix components;              // k x d, orthonormal rows
    std::vector<double> explained_variance;
};

// test-only audit of fit calls, used to assert the no-leakage property
struct EvalAudit {
    bool enabled = false;
    std::vector<std::pair<std::string, std::size_t>> fit_calls; // op, n_rows
};
inline EvalAudit& eval_audit() {
    static EvalAudit audit;
    return audit;
}

// ---------------------------------------------------------------------------

// Per-column z-score with population std; constant columns (std < 1e-12)
// are dropped and recorded.
inline StandardizeResult standardize(const Matrix& X) {
    if (eval_audit().enabled) eval_audit().fit_calls.emplace_back("standardize", X.rows);
    if (X.rows == 0) throw std::invalid_argument("standardize: empty matrix");

    StandardizeResult out;
    std::vector<double> means(X.cols, 0.0), stds(X.cols, 0.0);
    for (std::size_t c = 0; c < X.cols; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < X.rows; ++r) s += X.at(r, c);
        means[c] = s / static_cast<double>(X.rows);
        double v = 0;
        for (std::size_t r = 0; r < X.rows; ++r) {
            double d = X.at(r, c) - means[c];
            v += d * d;
        }
        stds[c] = std::sqrt(v / static_cast<double>(X.rows));
    }
    for (std::size_t c = 0; c < X.cols; ++c) {
        if (stds[c] < 1e-12) out.dropped_columns.push_back(c);
        else out.kept_columns.push_back(c);
    }
    if (out.kept_columns.empty()) throw std::invalid_argument("standardize: all columns constant");

    out.transformed = Matrix(X.rows, out.kept_columns.size());
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t j = 0; j < out.kept_columns.size(); ++j) {
            std::size_t c = out.kept_columns[j];
            out.transformed.at(r, j) = (X.at(r, c) - means[c]) / stds[c];
        }
    for (std::size_t c : out.kept_columns) {
        out.means.push_back(means[c]);
        out.stds.push_back(stds[c]);
    }
    return out;
}

inline Matrix apply_standardize(const Matrix& X, const StandardizeResult& fit) {
    Matrix out(X.rows, fit.kept_columns.size());
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t j = 0; j < fit.kept_columns.size(); ++j)
            out.at(r, j) = (X.at(r, fit.kept_columns[j]) - fit.means[j]) / fit.stds[j];
    return out;
}

namespace eval_detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// eigenvalues (descending) and matching eigenvectors as matrix columns.
inline void jacobi_eigen(Matrix S, std::vector<double>& eigenvalues, Matrix& eigenvectors) {
    const std::size_t n = S.rows;
    eigenvectors = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) eigenvectors.at(i, i) = 1.0;

    double scale = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(S.at(i, j)));
    if (scale == 0) scale = 1;
    const double tol = 1e-14 * scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(S.at(p, q)));
        if (off <= tol) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = S.at(p, q);
                if (std::abs(apq) <= tol) continue;
                double app = S.at(p, p), aqq = S.at(q, q);
                double theta = (aqq - app) / (2 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    double skp = S.at(k, p), skq = S.at(k, q);
                    S.at(k, p) = c * skp - s * skq;
                    S.at(k, q) = s * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double spk = S.at(p, k), sqk = S.at(q, k);
                    S.at(p, k) = c * spk - s * sqk;
                    S.at(q, k) = s * spk + c * sqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = eigenvectors.at(k, p), vkq = eigenvectors.at(k, q);
                    eigenvectors.at(k, p) = c * vkp - s * vkq;
                    eigenvectors.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    eigenvalues.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = S.at(i, i);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return eigenvalues[a] > eigenvalues[b]; });
    std::vector<double> sorted_vals(n);
    Matrix sorted_vecs(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted_vals[j] = eigenvalues[order[j]];
        for (std::size_t i = 0; i < n; ++i) sorted_vecs.at(i, j) = eigenvectors.at(i, order[j]);
    }
    eigenvalues = std::move(sorted_vals);
    eigenvectors = std::move(sorted_vecs);
}

} // namespace eval_detail

// PCA over standardized data: top-k eigenpairs of the covariance (1/n
// normalization). Sign convention: the largest-magnitude entry of each
// component is positive; ties resolve to the lowest index.
inline PcaResult pca_fit_transform(const Matrix& X, std::size_t k) {
    if (eval_audit().enabled) eval_audit().fit_calls.emplace_back("pca", X.rows);
    if (X.rows < 2) throw std::invalid_argument("pca: need at least 2 rows");
    if (k < 1 || k > std::min(X.rows - 1, X.cols))
        throw std::invalid_argument("pca: k must satisfy 1 <= k <= min(n-1, d)");

    const std::size_t n = X.rows, d = X.cols;
    Matrix cov(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            double s = 0;
            for (std::size_t r = 0; r < n; ++r) s += X.at(r, i) * X.at(r, j);
            s /= static_cast<double>(n);
            cov.at(i, j) = s;
            cov.at(j, i) = s;
        }

    std::vector<double> eigenvalues;
    Matrix eigenvectors;
    eval_detail::jacobi_eigen(std::move(cov), eigenvalues, eigenvectors);

    PcaResult out;
    out.components = Matrix(k, d);
    out.explained_variance.assign(eigenvalues.begin(), eigenvalues.begin() + static_cast<long>(k));
    for (std::size_t comp = 0; comp < k; ++comp) {
        std::size_t arg = 0;
        double best = -1;
        for (std::size_t i = 0; i < d; ++i) {
            double m = std::abs(eigenvectors.at(i, comp));
            if (m > best) { best = m; arg = i; }
        }
        double sign = eigenvectors.at(arg, comp) < 0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < d; ++i)
            out.components.at(comp, i) = sign * eigenvectors.at(i, comp);
    }

    out.scores = Matrix(n, k);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t comp = 0; comp < k; ++comp) {
            double s = 0;
            for (std::size_t i = 0; i < d; ++i) s += X.at(r, i) * out.components.at(comp, i);
            out.scores.at(r, comp) = s;
        }
    return out;
}

inline Matrix pca_project(const Matrix& X, const PcaResult& fit) {
    Matrix out(X.rows, fit.components.rows);
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t comp = 0; comp < fit.components.rows; ++comp) {
            double s = 0;
            for (std::size_t i = 0; i < fit.components.cols; ++i)
                s += X.at(r, i) * fit.components.at(comp, i);
            out.at(r, comp) = s;
        }
    return out;
}

// Mean of per-class recall over the classes present in y_true.
inline double balanced_accuracy(const std::vector<std::string>& y_true,
                                const std::vector<std::string>& y_pred) {
    if (y_true.empty() || y_true.size() != y_pred.size())
        throw std::invalid_argument("balanced_accuracy: empty or mismatched inputs");
    std::map<std::string, std::pair<long long, long long>> per_class; // correct, total
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        auto& [correct, total] = per_class[y_true[i]];
        ++total;
        if (y_pred[i] == y_true[i]) ++correct;
    }
    double sum = 0;
    for (const auto& [label, counts] : per_class)
        sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
    return sum / static_cast<double>(per_class.size());
}

// ---------------------------------------------------------------------------
// model zoo: kNN (k=5), multinomial logistic regression, majority dummy

namespace eval_detail {

// deterministic in-place Fisher-Yates; std::shuffle is implementation-defined
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng() % i;
        std::swap(v[i - 1], v[j]);
    }
}

inline std::vector<std::string> knn_predict(const Matrix& train_X,
                                            const std::vector<std::string>& train_y,
                                            const Matrix& test_X, std::size_t k) {
    std::vector<std::string> out;
    out.reserve(test_X.rows);
    k = std::min<std::size_t>(k, train_X.rows);
    for (std::size_t t = 0; t < test_X.rows; ++t) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(train_X.rows);
        for (std::size_t r = 0; r < train_X.rows; ++r) {
            double s = 0;
            for (std::size_t c = 0; c < train_X.cols; ++c) {
                double d = test_X.at(t, c) - train_X.at(r, c);
                s += d * d;
            }
            dist.emplace_back(s, r);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
        // vote; ties break on summed distance, then label order
        std::map<std::string, std::pair<long long, double>> votes; // count, distance sum
        for (std::size_t i = 0; i < k; ++i) {
            auto& [count, dsum] = votes[train_y[dist[i].second]];
            ++count;
            dsum += dist[i].first;
        }
        const std::string* winner = nullptr;
        for (const auto& [label, v] : votes) {
            if (!winner) { winner = &label; continue; }
            const auto& w = votes.at(*winner);
            if (v.first > w.first || (v.first == w.first && v.second < w.second)) winner = &label;
        }
        out.push_back(*winner);
    }
    return out;
}

// full-batch gradient descent, 500 iterations, step 0.1, L2 1e-2 on the
// weights (bias unregularized)
inline std::vector<std::string> logreg_predict(const Matrix& train_X,
                                               const std::vector<std::string>& train_y,
                                               const Matrix& test_X) {
    std::vector<std::string> classes(train_y.begin(), train_y.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    const std::size_t C = classes.size(), n = train_X.rows, d = train_X.cols;
    std::map<std::string, std::size_t> class_index;
    for (std::size_t c = 0; c < C; ++c) class_index[classes[c]] = c;

    constexpr int kIterations = 500;
    constexpr double kStep = 0.1;
    constexpr double kL2 = 1e-2;

    Matrix W(d + 1, C); // last row is the bias
    Matrix P(n, C);
    for (int iter = 0; iter < kIterations; ++iter) {
        for (std::size_t r = 0; r < n; ++r) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < C; ++c) {
                double z = W.at(d, c);
                for (std::size_t j = 0; j < d; ++j) z += train_X.at(r, j) * W.at(j, c);
                P.at(r, c) = z;
                mx = std::max(mx, z);
            }
            double sum = 0;
            for (std::size_t c = 0; c < C; ++c) {
                P.at(r, c) = std::exp(P.at(r, c) - mx);
                sum += P.at(r, c);
            }
            for (std::size_t c = 0; c < C; ++c) P.at(r, c) /= sum;
        }
        Matrix G(d + 1, C);
        for (std::size_t r = 0; r < n; ++r) {
            std::size_t yi = class_index[train_y[r]];
            for (std::size_t c = 0; c < C; ++c) {
                double g = P.at(r, c) - (c == yi ? 1.0 : 0.0);
                for (std::size_t j = 0; j < d; ++j) G.at(j, c) += train_X.at(r, j) * g;
                G.at(d, c) += g;
            }
        }
        double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j <= d; ++j)
            for (std::size_t c = 0; c < C; ++c) {
                double reg = (j < d) ? kL2 * W.at(j, c) : 0.0;
                W.at(j, c) -= kStep * (G.at(j, c) * inv_n + reg);
            }
    }

    std::vector<std::string> out;
    out.reserve(test_X.rows);
    for (std::size_t r = 0; r < test_X.rows; ++r) {
        std::size_t arg = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < C; ++c) {
            double z = W.at(d, c);
            for (std::size_t j = 0; j < test_X.cols; ++j) z += test_X.at(r, j) * W.at(j, c);
            if (z > best) { best = z; arg = c; }
        }
        out.push_back(classes[arg]);
    }
    return out;
}

inline std::string majority_class(const std::vector<std::string>& y) {
    std::map<std::string, long long> counts;
    for (const auto& label : y) ++counts[label];
    std::string best;
    long long best_count = -1;
    for (const auto& [label, count] : counts)
        if (count > best_count) { best = label; best_count = count; }
    return best;
}

} // namespace eval_detail

// Stratified fold ids: per class (sorted), rows ordered by (id, index) are
// shuffled with the seeded generator, then dealt round-robin.
inline std::vector<int> stratified_folds(const std::vector<std::string>& y,
                                         const std::vector<std::string>& ids, int folds,
                                         std::uint32_t seed) {
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    std::mt19937 rng(seed);
    std::vector<int> fold_of(y.size(), 0);
    for (auto& [label, members] : by_class) {
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return std::tie(ids[a], a) < std::tie(ids[b], b);
        });
        eval_detail::seeded_shuffle(members, rng);
        for (std::size_t pos = 0; pos < members.size(); ++pos)
            fold_of[members[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    }
    return fold_of;
}

struct CrossValidateOptions {
    std::optional<std::size_t> pca_k;
    bool paper_mode = false; // standardize + PCA fit once on the full table
};

inline EvalResult cross_validate(const LabeledMatrix& M, int folds, std::uint32_t seed,
                                 CrossValidateOptions options = {}) {
    if (folds < 2) throw std::invalid_argument("cross_validate: folds must be >= 2");
    std::map<std::string, long long> class_counts;
    for (const auto& label : M.y) ++class_counts[label];
    if (class_counts.size() < 2) throw std::invalid_argument("cross_validate: need >= 2 classes");
    for (const auto& [label, count] : class_counts)
        if (count < folds)
            throw std::invalid_argument("cross_validate: class '" + label + "' has " +
                                        std::to_string(count) + " samples, fewer than folds");
    for (double v : M.X.a)
        if (std::isnan(v) || std::isinf(v))
            throw std::invalid_argument("cross_validate: matrix contains NaN or inf");

    std::vector<int> fold_of = stratified_folds(M.y, M.ids, folds, seed);

    Matrix base = M.X;
    if (options.paper_mode) {
        try {
            StandardizeResult st = standardize(base);
            base = st.transformed;
            if (options.pca_k) {
                std::size_t k = std::min({*options.pca_k, base.rows - 1, base.cols});
                if (k >= 1) base = pca_fit_transform(base, k).scores;
            }
        } catch (const std::invalid_argument&) {
            base = M.X; // all columns constant: run the models on raw features
        }
    }

    const char* model_names[3] = {"knn5", "logreg", "dummy"};
    std::map<std::string, double> totals;
    for (const char* name : model_names) totals[name] = 0.0;

    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < M.y.size(); ++i)
            (fold_of[i] == f ? test_idx : train_idx).push_back(i);
        if (test_idx.empty() || train_idx.empty()) continue;

        auto take = [&](const Matrix& src, const std::vector<std::size_t>& rows) {
            Matrix out(rows.size(), src.cols);
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < src.cols; ++c) out.at(r, c) = src.at(rows[r], c);
            return out;
        };
        Matrix train_X = take(base, train_idx);
        Matrix test_X = take(base, test_idx);
        std::vector<std::string> train_y, test_y;
        for (std::size_t i : train_idx) train_y.push_back(M.y[i]);
        for (std::size_t i : test_idx) test_y.push_back(M.y[i]);

        if (!options.paper_mode) {
            try {
                StandardizeResult st = standardize(train_X);
                test_X = apply_standardize(test_X, st);
                train_X = st.transformed;
                if (options.pca_k) {
                    std::size_t k = std::min({*options.pca_k, train_X.rows - 1, train_X.cols});
                    if (k >= 1) {
                        PcaResult pca = pca_fit_transform(train_X, k);
                        test_X = pca_project(test_X, pca);
                        train_X = std::move(pca.scores);
                    }
                }
            } catch (const std::invalid_argument&) {
                // all training columns constant: run the models on raw features
            }
        }

        totals["knn5"] += balanced_accuracy(test_y, eval_detail::knn_predict(train_X, train_y, test_X, 5));
        totals["logreg"] += balanced_accuracy(test_y, eval_detail::logreg_predict(train_X, train_y, test_X));
        std::vector<std::string> dummy_pred(test_y.size(), eval_detail::majority_class(train_y));
        totals["dummy"] += balanced_accuracy(test_y, dummy_pred);
    }

    EvalResult result;
    result.folds = folds;
    result.seed = seed;
    for (const auto& [name, total] : totals)
        result.per_model[name] = total / static_cast<double>(folds);
    for (const auto& [name, acc] : result.per_model)
        if (result.best.empty() || acc > result.per_model[result.best]) result.best = name;
    return result;
}

// ---------------------------------------------------------------------------
// table plumbing for the protocol

// Keep file ids present in every table and in the label map; drop classes
// with fewer than 2 x folds samples; all tables restricted to the same ids,
// in the first table's order.
inline std::vector<LabeledMatrix> intersect_and_prune(
    const std::vector<FeatureTable>& tables, const std::map<std::string, std::string>& labels,
    int folds) {
    if (folds < 2) throw std::invalid_argument("intersect_and_prune: folds must be >= 2");
    if (tables.empty()) throw std::invalid_argument("intersect_and_prune: no tables");

    auto row_key = [](const TableRow& r) {
        return std::make_tuple(r.file_id, r.window_start, r.window_end);
    };
    using Key = std::tuple<std::string, long long, long long>;

    std::vector<std::map<Key, std::size_t>> index(tables.size());
    for (std::size_t t = 0; t < tables.size(); ++t)
        for (std::size_t r = 0; r < tables[t].rows.size(); ++r)
            index[t].emplace(row_key(tables[t].rows[r]), r);

    // candidate keys: first table's order, present everywhere, labeled
    std::vector<Key> keys;
    for (const auto& row : tables[0].rows) {
        Key key = row_key(row);
        if (!labels.count(row.file_id)) continue;
        bool everywhere = true;
        for (std::size_t t = 1; t < tables.size(); ++t)
            if (!index[t].count(key)) { everywhere = false; break; }
        if (everywhere) keys.push_back(key);
    }

    std::map<std::string, long long> class_counts;
    for (const auto& key : keys) ++class_counts[labels.at(std::get<0>(key))];
    std::set<std::string> kept_classes;
    for (const auto& [label, count] : class_counts)
        if (count >= 2LL * folds) kept_classes.insert(label);
    if (kept_classes.size() < 2)
        throw std::invalid_argument("intersect_and_prune: fewer than 2 classes survive");

    std::vector<Key> final_keys;
    for (const auto& key : keys)
        if (kept_classes.count(labels.at(std::get<0>(key)))) final_keys.push_back(key);

    std::vector<LabeledMatrix> out;
    for (std::size_t t = 0; t < tables.size(); ++t) {
        LabeledMatrix m;
        m.feature_names = tables[t].columns;
        m.X = Matrix(final_keys.size(), tables[t].columns.size());
        for (std::size_t r = 0; r < final_keys.size(); ++r) {
            const TableRow& row = tables[t].rows[index[t].at(final_keys[r])];
            for (std::size_t c = 0; c < tables[t].columns.size(); ++c) m.X.at(r, c) = row.values[c];
            m.y.push_back(labels.at(row.file_id));
            m.ids.push_back(row.file_id);
        }
        out.push_back(std::move(m));
    }
    return out;
}

// Inner join on (file_id, window); feature columns renamed <tag>.<name>;
// row order follows the first table restricted to the join.
inline FeatureTable combine_tables(const std::vector<FeatureTable>& tables,
                                   const std::vector<std::string>& tags) {
    if (tables.size() != tags.size() || tables.size() < 2)
        throw std::invalid_argument("combine_tables: need >= 2 tables with matching tags");
    std::set<std::string> tag_set(tags.begin(), tags.end());
    if (tag_set.size() != tags.size()) throw std::invalid_argument("combine_tables: duplicate tags");

    using Key = std::tuple<std::string, long long, long long>;
    auto row_key = [](const TableRow& r) {
        return std::make_tuple(r.file_id, r.window_start, r.window_end);
    };
    std::vector<std::map<Key, std::size_t>> index(tables.size());
    for (std::size_t t = 1; t < tables.size(); ++t)
        for (std::size_t r = 0; r < tables[t].rows.size(); ++r)
            index[t].emplace(row_key(tables[t].rows[r]), r);

    FeatureTable out;
    for (std::size_t t = 0; t < tables.size(); ++t)
        for (const auto& col : tables[t].columns) out.columns.push_back(tags[t] + "." + col);

    for (const auto& row : tables[0].rows) {
        Key key = row_key(row);
        bool everywhere = true;
        for (std::size_t t = 1; t < tables.size(); ++t)
            if (!index[t].count(key)) { everywhere = false; break; }
        if (!everywhere) continue;
        TableRow nr;
        nr.file_id = row.file_id;
        nr.window_start = row.window_start;
        nr.window_end = row.window_end;
        nr.values = row.values;
        for (std::size_t t = 1; t < tables.size(); ++t) {
            const TableRow& other = tables[t].rows[index[t].at(key)];
            nr.values.insert(nr.values.end(), other.values.begin(), other.values.end());
        }
        out.rows.push_back(std::move(nr));
    }
    if (out.rows.empty()) throw std::invalid_argument("combine_tables: empty join");
    return out;
}

} // namespace notefeat
