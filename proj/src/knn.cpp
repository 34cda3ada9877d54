#include "nilm/knn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace nilm {

KnnModel knn_fit(const LabeledEventSet& train, int k, double minkowski_p) {
    train.check_consistent();
    if (k <= 1) throw NilmError("KTooSmall: k must be greater than 1");
    if (minkowski_p < 1.0) throw NilmError("InvalidConfig: minkowski_p must be >= 1");

    std::vector<Index> keep;
    for (Index i = 0; i < train.size(); ++i)
        if (!train.labels[i].is_unknown()) keep.push_back(i);
    if (keep.empty()) throw NilmError("EmptyTrain: no labeled events");
    if (static_cast<Index>(k) > static_cast<Index>(keep.size()))
        throw NilmError("KTooLarge: k=" + std::to_string(k) + " with " +
                        std::to_string(keep.size()) + " training events");

    MatrixXd raw(static_cast<Index>(keep.size()), train.features.cols());
    KnnModel model;
    model.k = k;
    model.minkowski_p = minkowski_p;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        raw.row(static_cast<Index>(i)) = train.features.row(keep[i]);
        model.labels.push_back(train.labels[keep[i]]);
    }
    model.scaler = fit_scaler(raw);
    model.features = apply_scaler(model.scaler, raw);
    return model;
}

namespace {

double minkowski(const VectorXd& a, const VectorXd& b, double p) {
    if (p == 2.0) return (a - b).norm();
    if (p == 1.0) return (a - b).cwiseAbs().sum();
    double acc = 0.0;
    for (Index i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] - b[i]), p);
    return std::pow(acc, 1.0 / p);
}

}  // namespace

KnnPrediction knn_predict(const KnnModel& model, const VectorXd& event_feature) {
    if (event_feature.size() != model.features.cols())
        throw NilmError("DimensionMismatch: feature dim " + std::to_string(event_feature.size()) +
                        " vs training " + std::to_string(model.features.cols()));
    const VectorXd q = apply_scaler(model.scaler, event_feature);

    const Index n = model.size();
    std::vector<double> dist(n);
    for (Index i = 0; i < n; ++i)
        dist[i] = minkowski(model.features.row(i).transpose(), q, model.minkowski_p);

    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::nth_element(order.begin(), order.begin() + (model.k - 1), order.end(),
                     [&](Index a, Index b) { return dist[a] < dist[b]; });
    const double kth = dist[order[model.k - 1]];

    // everything tied with the k-th neighbor joins the vote
    struct Tally {
        int votes = 0;
        double dist_sum = 0.0;
    };
    std::map<EventLabel, Tally> tally;
    std::vector<double> neighborhood;
    for (Index i = 0; i < n; ++i) {
        if (dist[i] <= kth + 1e-12) {
            auto& t = tally[model.labels[i]];
            ++t.votes;
            t.dist_sum += dist[i];
            neighborhood.push_back(dist[i]);
        }
    }
    std::sort(neighborhood.begin(), neighborhood.end());

    const EventLabel* best = nullptr;
    int best_votes = -1;
    double best_mean = 0.0;
    for (const auto& [label, t] : tally) {
        const double mean = t.dist_sum / t.votes;
        // map iteration is label-ordered, so the strict < keeps the lowest
        // label on full ties
        if (t.votes > best_votes || (t.votes == best_votes && mean < best_mean - 1e-15)) {
            best = &label;
            best_votes = t.votes;
            best_mean = mean;
        }
    }
    return {*best, neighborhood};
}

StreamClassification knn_classify_stream(const KnnModel& model, const EventSignal& events,
                                         const FilteredSeries& filtered,
                                         const std::set<std::string>& overlap_group) {
    const MatrixXd feats = event_features(events, filtered);
    StreamClassification out;
    for (Index i = 0; i < feats.rows(); ++i) {
        const auto pred = knn_predict(model, feats.row(i).transpose());
        const LabeledEvent le{events.events[static_cast<std::size_t>(i)].t,
                              events.events[static_cast<std::size_t>(i)].delta, pred.label};
        out.per_appliance[pred.label.appliance_id].push_back(le);
        if (overlap_group.count(pred.label.appliance_id)) out.ambiguous.push_back(le);
    }
    return out;
}

std::set<std::string> default_overlap_group() {
    return {"fridge", "dishwasher", "washing_machine"};
}

void save_knn_csv(const KnnModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw NilmError("IoError: cannot write " + path);
    out << "# knn v1 k=" << model.k << " p=" << model.minkowski_p
        << " dim=" << model.features.cols() << "\n";
    char buf[40];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "scaler_min";
    for (Index c = 0; c < model.scaler.dim(); ++c) out << "," << fmt(model.scaler.min[c]);
    out << "\nscaler_max";
    for (Index c = 0; c < model.scaler.dim(); ++c) out << "," << fmt(model.scaler.max[c]);
    out << "\n";
    for (Index i = 0; i < model.size(); ++i) {
        for (Index c = 0; c < model.features.cols(); ++c) out << fmt(model.features(i, c)) << ",";
        out << model.labels[i].appliance_id << "," << model.labels[i].from_mode << ","
            << model.labels[i].to_mode << "\n";
    }
}

KnnModel load_knn_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NilmError("IoError: cannot open " + path);
    std::string header;
    std::getline(in, header);
    KnnModel model;
    Index dim = 0;
    if (std::sscanf(header.c_str(), "# knn v1 k=%d p=%lf dim=%ld", &model.k, &model.minkowski_p,
                    &dim) != 3)
        throw NilmError("VersionMismatch: bad knn header in " + path);

    auto read_scaler_row = [&](const std::string& tag) {
        std::string line;
        if (!std::getline(in, line) || line.rfind(tag, 0) != 0)
            throw NilmError("ParseError: missing " + tag + " in " + path);
        VectorXd v(dim);
        std::stringstream ss(line.substr(tag.size() + 1));
        std::string f;
        for (Index c = 0; c < dim; ++c) {
            if (!std::getline(ss, f, ',')) throw NilmError("ParseError: " + tag + " in " + path);
            v[c] = std::stod(f);
        }
        return v;
    };
    model.scaler.min = read_scaler_row("scaler_min");
    model.scaler.max = read_scaler_row("scaler_max");

    std::vector<VectorXd> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        VectorXd feat(dim);
        for (Index c = 0; c < dim; ++c) {
            if (!std::getline(ss, f, ',')) throw NilmError("ParseError: row in " + path);
            feat[c] = std::stod(f);
        }
        EventLabel label;
        if (!std::getline(ss, label.appliance_id, ',')) throw NilmError("ParseError: " + path);
        if (!std::getline(ss, f, ',')) throw NilmError("ParseError: " + path);
        label.from_mode = std::stoi(f);
        if (!std::getline(ss, f, ',')) throw NilmError("ParseError: " + path);
        label.to_mode = std::stoi(f);
        rows.push_back(feat);
        model.labels.push_back(label);
    }
    model.features.resize(static_cast<Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        model.features.row(static_cast<Index>(i)) = rows[i].transpose();
    return model;
}

}  // namespace nilm
