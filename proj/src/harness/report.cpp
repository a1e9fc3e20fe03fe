#include "replab/harness/report.hpp"

#include <fstream>
#include <sstream>
#include <iomanip>
#include <map>
#include <ostream>

namespace replab::harness {

namespace {

struct Group {
    std::vector<double> train, test;
    std::vector<const RunRecord*> records;
};

std::map<std::string, Group> group_by_label(const std::vector<RunRecord>& records) {
    std::map<std::string, Group> groups;
    for (const auto& r : records) {
        auto& g = groups[r.label];
        g.train.push_back(r.final_train_return);
        g.test.push_back(r.final_test_return);
        g.records.push_back(&r);
    }
    return groups;
}

}  // namespace

ScoreTable build_score_table(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("build_score_table: no run records");
    for (const auto& r : records)
        if (r.kind != records.front().kind)
            throw std::invalid_argument(
                "build_score_table: records mix incompatible environments");

    auto groups = group_by_label(records);
    const std::string baseline_label = "ppo:coupled";
    auto baseline_it = groups.find(baseline_label);
    if (baseline_it == groups.end())
        throw std::invalid_argument("build_score_table: no PPO coupled baseline present");
    const double base_train = mean(baseline_it->second.train);
    const double base_test = mean(baseline_it->second.test);
    if (base_train == 0.0 || base_test == 0.0)
        throw std::invalid_argument("build_score_table: baseline mean is zero, cannot normalise");

    ScoreTable table;
    table.baseline_label = baseline_label;
    for (const auto& [label, group] : groups) {
        ScoreRow row;
        row.label = label;
        row.seeds = static_cast<int>(group.train.size());
        row.train_mean = mean(group.train);
        row.test_mean = mean(group.test);
        row.train_norm = row.train_mean / base_train;
        row.test_norm = row.test_mean / base_test;
        row.train_ci = ci95_halfwidth(group.train);
        row.test_ci = ci95_halfwidth(group.test);
        row.is_baseline = label == baseline_label;
        if (!row.is_baseline && group.train.size() >= 2 && baseline_it->second.train.size() >= 2) {
            row.train_welch = welch_t_test(group.train, baseline_it->second.train);
            row.test_welch = welch_t_test(group.test, baseline_it->second.test);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

std::string fmt(double v, int precision = 4) {
    if (!std::isfinite(v)) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

}  // namespace

void write_score_table(std::ostream& os, const ScoreTable& table) {
    os << std::left << std::setw(40) << "configuration" << std::right << std::setw(7) << "seeds"
       << std::setw(12) << "train" << std::setw(12) << "test" << std::setw(12) << "train/bl"
       << std::setw(12) << "test/bl" << std::setw(10) << "t(train)" << std::setw(10) << "t(test)"
       << std::setw(6) << "sig" << "\n";
    for (const auto& row : table.rows) {
        os << std::left << std::setw(40) << row.label << std::right << std::setw(7) << row.seeds
           << std::setw(12) << fmt(row.train_mean) << std::setw(12) << fmt(row.test_mean)
           << std::setw(12) << fmt(row.train_norm) << std::setw(12) << fmt(row.test_norm);
        if (row.is_baseline)
            os << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(6) << "-";
        else
            os << std::setw(10) << fmt(row.train_welch.t, 3) << std::setw(10)
               << fmt(row.test_welch.t, 3) << std::setw(6)
               << (row.train_welch.significant || row.test_welch.significant ? "*" : "");
        os << "\n";
    }
    os << "baseline: " << table.baseline_label << " (normalised scores = 1 by construction)\n";
}

void write_score_csv(std::ostream& os, const ScoreTable& table) {
    os << "label,seeds,train_mean,test_mean,train_norm,test_norm,train_ci95,test_ci95,"
          "welch_t_train,welch_t_test,significant\n";
    os.precision(12);
    for (const auto& row : table.rows) {
        os << row.label << "," << row.seeds << "," << row.train_mean << "," << row.test_mean << ","
           << row.train_norm << "," << row.test_norm << "," << row.train_ci << "," << row.test_ci
           << ",";
        if (row.is_baseline)
            os << ",,";
        else
            os << row.train_welch.t << "," << row.test_welch.t << ","
               << (row.train_welch.significant || row.test_welch.significant ? 1 : 0);
        os << "\n";
    }
}

namespace {

double metric_value(const mi::MetricSet& set, const std::string& name) {
    if (name == "level") return set.level.clamped();
    if (name == "value") return set.value.clamped();
    if (name == "action") return set.action.clamped();
    return set.next.clamped();
}

}  // namespace

void write_mi_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "label,representation,variable,metric,mean,ci95,seeds\n";
    os.precision(12);
    const std::vector<std::string> names{"level", "value", "action", "next"};
    // (label, representation) -> metric -> per-seed values
    std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<double>>> cells;
    for (const auto& r : records)
        for (const auto& rep : r.mi_reports)
            for (const auto& name : names) {
                cells[{r.label, rep.representation}]["z:" + name].push_back(
                    metric_value(rep.z, name));
                cells[{r.label, rep.representation}]["o:" + name].push_back(
                    metric_value(rep.obs, name));
            }
    for (const auto& [key, metrics] : cells) {
        for (const auto& [metric, values] : metrics) {
            const auto variable = metric.substr(0, 1);
            const auto name = metric.substr(2);
            os << key.first << "," << key.second << "," << variable << "," << name << ","
               << mean(values) << "," << ci95_halfwidth(values) << "," << values.size() << "\n";
        }
    }
}

void write_sweep_curve_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "sweep_value,label,representation,mi_z_level_mean,mi_z_value_mean,seeds\n";
    os.precision(12);
    std::map<std::tuple<double, std::string, std::string>,
             std::pair<std::vector<double>, std::vector<double>>>
        cells;
    for (const auto& r : records) {
        if (!std::isfinite(r.sweep_value)) continue;
        for (const auto& rep : r.mi_reports) {
            auto& cell = cells[{r.sweep_value, r.label, rep.representation}];
            cell.first.push_back(rep.z.level.clamped());
            cell.second.push_back(rep.z.value.clamped());
        }
    }
    for (const auto& [key, cell] : cells)
        os << std::get<0>(key) << "," << std::get<1>(key) << "," << std::get<2>(key) << ","
           << mean(cell.first) << "," << mean(cell.second) << "," << cell.first.size() << "\n";
}

void emit_report(const std::vector<RunRecord>& records, const std::filesystem::path& out_dir) {
    if (records.empty()) throw std::invalid_argument("emit_report: no run records");
    std::filesystem::create_directories(out_dir);
    auto table = build_score_table(records);
    {
        std::ofstream os(out_dir / "scores.txt");
        write_score_table(os, table);
    }
    {
        std::ofstream os(out_dir / "scores.csv");
        write_score_csv(os, table);
    }
    {
        std::ofstream os(out_dir / "mi_metrics.csv");
        write_mi_csv(os, records);
    }
    bool any_sweep = false;
    for (const auto& r : records) any_sweep |= std::isfinite(r.sweep_value);
    if (any_sweep) {
        std::ofstream os(out_dir / "sweep_curves.csv");
        write_sweep_curve_csv(os, records);
    }
}

}  // namespace replab::harness
