#include "vmfdoc/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "vmfdoc/errors.hpp"
#include "vmfdoc/rng.hpp"
#include "vmfdoc/vecops.hpp"

namespace vmfdoc {

int EvalDataset::classes() const {
    int c = 0;
    for (int label : y) c = std::max(c, label + 1);
    return c;
}

void EvalDataset::validate() const {
    if (X.size() != y.size()) throw LengthMismatchError("feature and label counts differ");
    if (size() < 2) throw InvalidArgumentError("need at least two examples");
    std::size_t d = X[0].size();
    for (const auto& row : X) {
        if (row.size() != d) throw DimensionMismatchError("feature rows have mixed dimensions");
        for (double v : row)
            if (!std::isfinite(v)) throw InvalidArgumentError("non-finite feature value");
    }
    for (int label : y)
        if (label < 0) throw InvalidArgumentError("negative label");
    std::vector<bool> seen(static_cast<std::size_t>(classes()), false);
    for (int label : y) seen[static_cast<std::size_t>(label)] = true;
    for (std::size_t c = 0; c < seen.size(); ++c)
        if (!seen[c])
            throw InvalidArgumentError("class " + std::to_string(c) + " has no examples");
}

double LinearModel::score(int cls, const std::vector<double>& x) const {
    const double* w = weights.data() + static_cast<std::size_t>(cls) * static_cast<std::size_t>(dim);
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += w[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
    return s;
}

LinearModel train_linear(const EvalDataset& data, const ClassifierConfig& cfg) {
    data.validate();
    if (cfg.epochs < 1) throw InvalidArgumentError("epochs must be at least 1");
    if (!(cfg.l2 >= 0.0)) throw InvalidArgumentError("l2 must be non-negative");
    if (!(cfg.lr0 > 0.0)) throw InvalidArgumentError("learning rate must be positive");
    int n_classes = data.classes();
    if (n_classes < 2) throw SingleClassError("training needs at least two classes");

    std::size_t n = data.size();
    std::size_t d = static_cast<std::size_t>(data.dim());
    LinearModel model;
    model.dim = data.dim();
    model.classes = n_classes;
    model.weights.assign(static_cast<std::size_t>(n_classes) * d, 0.0);

    std::vector<std::size_t> order(n);
    for (int cls = 0; cls < n_classes; ++cls) {
        double* w = model.weights.data() + static_cast<std::size_t>(cls) * d;
        Rng rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(cls + 1)));
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::size_t t = 0;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            rng.shuffle(order);
            for (std::size_t idx : order) {
                double lr = cfg.lr0 / (1.0 + cfg.lr0 * cfg.l2 * static_cast<double>(t));
                ++t;
                const std::vector<double>& x = data.X[idx];
                double target = data.y[idx] == cls ? 1.0 : -1.0;
                double margin = 0.0;
                for (std::size_t j = 0; j < d; ++j) margin += w[j] * x[j];
                margin *= target;
                double pull = 0.0;
                if (cfg.loss == Loss::Hinge) {
                    if (margin < 1.0) pull = 1.0;
                } else {
                    // logistic: sigma(-margin), numerically stable on both sides
                    pull = margin >= 0.0 ? std::exp(-margin) / (1.0 + std::exp(-margin))
                                         : 1.0 / (1.0 + std::exp(margin));
                }
                double decay = 1.0 - lr * cfg.l2;
                for (std::size_t j = 0; j < d; ++j)
                    w[j] = decay * w[j] + lr * pull * target * x[j];
            }
        }
    }
    return model;
}

std::vector<int> predict(const LinearModel& model, const std::vector<std::vector<double>>& X) {
    std::vector<int> labels;
    labels.reserve(X.size());
    for (const auto& x : X) {
        if (static_cast<int>(x.size()) != model.dim)
            throw DimensionMismatchError("feature dimension does not match the model");
        int best = 0;
        double best_score = model.score(0, x);
        for (int cls = 1; cls < model.classes; ++cls) {
            double s = model.score(cls, x);
            if (s > best_score) {
                best_score = s;
                best = cls;
            }
        }
        labels.push_back(best);
    }
    return labels;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& gold) {
    if (pred.size() != gold.size()) throw LengthMismatchError("prediction and label counts differ");
    if (pred.empty()) throw LengthMismatchError("cannot score an empty prediction set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == gold[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

CvResult kfold_cv(const EvalDataset& data, int k, const ClassifierConfig& cfg, std::uint64_t seed) {
    data.validate();
    if (k < 2) throw InvalidArgumentError("need at least two folds");
    std::size_t n = data.size();
    if (n < static_cast<std::size_t>(k)) throw TooFewExamplesError("fewer examples than folds");

    // Stratified assignment: shuffle within each class, then deal round-robin
    // with one cursor shared across classes so fold sizes stay within one.
    int n_classes = data.classes();
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < n; ++i)
        by_class[static_cast<std::size_t>(data.y[i])].push_back(i);
    std::vector<int> fold_of(n, 0);
    Rng rng(seed);
    int cursor = 0;
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t idx : members) {
            fold_of[idx] = cursor;
            cursor = (cursor + 1) % k;
        }
    }

    CvResult result;
    for (int fold = 0; fold < k; ++fold) {
        EvalDataset train;
        std::vector<std::vector<double>> test_x;
        std::vector<int> test_y;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] == fold) {
                test_x.push_back(data.X[i]);
                test_y.push_back(data.y[i]);
            } else {
                train.X.push_back(data.X[i]);
                train.y.push_back(data.y[i]);
            }
        }
        ClassifierConfig fold_cfg = cfg;
        fold_cfg.seed = cfg.seed ^ static_cast<std::uint64_t>(fold);
        LinearModel model = train_linear(train, fold_cfg);
        result.fold_accuracy.push_back(accuracy(predict(model, test_x), test_y));
    }
    result.mean_accuracy =
        std::accumulate(result.fold_accuracy.begin(), result.fold_accuracy.end(), 0.0) /
        static_cast<double>(k);
    return result;
}

namespace {

bool parse_double_field(std::string_view s, double& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

ReprFile read_repr_tsv(std::istream& in) {
    ReprFile file;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab1 = line.find('\t');
        auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw ParseError("expected id<TAB>label<TAB>values", lineno);
        std::string id = line.substr(0, tab1);
        if (id.empty()) throw ParseError("empty id", lineno);
        std::string label = line.substr(tab1 + 1, tab2 - tab1 - 1);
        std::optional<int> parsed_label;
        if (!label.empty()) {
            int v = 0;
            auto res = std::from_chars(label.data(), label.data() + label.size(), v);
            if (res.ec != std::errc{} || res.ptr != label.data() + label.size())
                throw ParseError("label \"" + label + "\" is not an integer", lineno);
            parsed_label = v;
        }
        std::vector<double> row;
        std::string_view rest = std::string_view(line).substr(tab2 + 1);
        std::size_t pos = 0;
        while (pos < rest.size()) {
            while (pos < rest.size() && rest[pos] == ' ') ++pos;
            std::size_t start = pos;
            while (pos < rest.size() && rest[pos] != ' ') ++pos;
            if (pos > start) {
                double v = 0.0;
                if (!parse_double_field(rest.substr(start, pos - start), v))
                    throw ParseError("bad value \"" + std::string(rest.substr(start, pos - start)) +
                                         "\"",
                                     lineno);
                row.push_back(v);
            }
        }
        if (row.empty()) throw ParseError("row has no values", lineno);
        if (file.dim == 0)
            file.dim = static_cast<int>(row.size());
        else if (static_cast<int>(row.size()) != file.dim)
            throw ParseError("row has " + std::to_string(row.size()) + " values, expected " +
                                 std::to_string(file.dim),
                             lineno);
        file.ids.push_back(std::move(id));
        file.labels.push_back(parsed_label);
        file.X.push_back(std::move(row));
    }
    return file;
}

void write_repr_tsv(std::ostream& out, const ReprFile& file) {
    char num[40];
    for (std::size_t i = 0; i < file.ids.size(); ++i) {
        out << file.ids[i] << '\t';
        if (file.labels[i]) out << *file.labels[i];
        out << '\t';
        const auto& row = file.X[i];
        for (std::size_t j = 0; j < row.size(); ++j) {
            std::snprintf(num, sizeof(num), "%.17g", row[j]);
            if (j) out << ' ';
            out << num;
        }
        out << '\n';
    }
}

}  // namespace vmfdoc
