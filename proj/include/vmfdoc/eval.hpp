#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vmfdoc {

struct EvalDataset {
    std::vector<std::vector<double>> X;  // n rows of equal dimension
    std::vector<int> y;                  // labels in [0, C)

    std::size_t size() const { return y.size(); }
    int dim() const { return X.empty() ? 0 : static_cast<int>(X[0].size()); }
    int classes() const;
    void validate() const;  // throws on shape/label/NaN violations
};

enum class Loss { Hinge, Logistic };

struct ClassifierConfig {
    Loss loss = Loss::Hinge;
    double l2 = 1e-4;
    int epochs = 50;
    double lr0 = 0.5;
    std::uint64_t seed = 0;
};

// Bias-free one-vs-rest linear model, so a global positive rescaling of the
// inputs only rescales the scores and never changes the argmax.
struct LinearModel {
    int dim = 0;
    int classes = 0;
    std::vector<double> weights;  // classes x dim, row-major

    double score(int cls, const std::vector<double>& x) const;
};

// Deterministic seeded stochastic subgradient descent, one binary problem
// per class. Throws SingleClassError when fewer than two classes appear.
LinearModel train_linear(const EvalDataset& data, const ClassifierConfig& cfg);

// Argmax over class scores; exact ties resolve to the lowest class index.
std::vector<int> predict(const LinearModel& model, const std::vector<std::vector<double>>& X);

double accuracy(const std::vector<int>& pred, const std::vector<int>& gold);

struct CvResult {
    double mean_accuracy = 0.0;
    std::vector<double> fold_accuracy;
};

// Stratified fold assignment: within-class shuffles dealt round-robin with a
// cursor shared across classes, so fold sizes and per-fold class counts both
// stay within one of each other.
std::vector<int> stratified_folds(const std::vector<int>& labels, int k, std::uint64_t seed);

// Seeded stratified k-fold cross-validation; fold f trains with cfg.seed ^ f.
CvResult kfold_cv(const EvalDataset& data, int k, const ClassifierConfig& cfg, std::uint64_t seed);

// Representation file: id<TAB>label<TAB>v1 v2 ... vK, '#' comments allowed.
struct ReprFile {
    std::vector<std::string> ids;
    std::vector<std::optional<int>> labels;
    std::vector<std::vector<double>> X;
    int dim = 0;
};

ReprFile read_repr_tsv(std::istream& in);
void write_repr_tsv(std::ostream& out, const ReprFile& file);

}  // namespace vmfdoc
