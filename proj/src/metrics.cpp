#include "amlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "amlab/errors.hpp"

namespace amlab {

double DivergenceReport::d1() const {
    if (n1 == 0) throw ValidationError("divergence: reference class 1 is empty");
    return static_cast<double>(m1) / static_cast<double>(n1);
}

double DivergenceReport::d2() const {
    if (n2 == 0) throw ValidationError("divergence: reference class 2 is empty");
    return static_cast<double>(m2) / static_cast<double>(n2);
}

double DivergenceReport::d() const {
    if (n1 + n2 == 0) throw ValidationError("divergence: comparison set is empty");
    return static_cast<double>(m1 + m2) / static_cast<double>(n1 + n2);
}

double DivergenceReport::d_max() const { return std::max(d1(), d2()); }

static void check_label(int label, const char* who) {
    if (label != 1 && label != 2)
        throw ValidationError(std::string(who) + " classifier returned label " +
                              std::to_string(label) + ", expected 1 or 2");
}

DivergenceReport divergence(const Classifier& reference,
                            const Classifier& candidate,
                            const Dataset& comparison) {
    if (comparison.samples.empty())
        throw ValidationError("divergence: comparison set is empty");
    std::vector<int> ref_labels;
    ref_labels.reserve(comparison.samples.size());
    for (const auto& s : comparison.samples) {
        int r = reference(s.features);
        check_label(r, "reference");
        ref_labels.push_back(r);
    }
    return divergence_with_reference_labels(ref_labels, candidate, comparison);
}

DivergenceReport divergence_with_reference_labels(
    const std::vector<int>& reference_labels,
    const Classifier& candidate,
    const Dataset& comparison) {
    if (comparison.samples.empty())
        throw ValidationError("divergence: comparison set is empty");
    if (reference_labels.size() != comparison.samples.size())
        throw ValidationError("divergence: reference label count mismatch");
    DivergenceReport rep;
    for (std::size_t i = 0; i < comparison.samples.size(); ++i) {
        int r = reference_labels[i];
        check_label(r, "reference");
        int c = candidate(comparison.samples[i].features);
        check_label(c, "candidate");
        if (r == 1) {
            ++rep.n1;
            if (c != r) ++rep.m1;
        } else {
            ++rep.n2;
            if (c != r) ++rep.m2;
        }
    }
    if (rep.n1 == 0) throw ValidationError("divergence: reference class 1 is empty");
    if (rep.n2 == 0) throw ValidationError("divergence: reference class 2 is empty");
    return rep;
}

double error_rate(const Classifier& classifier, const Dataset& labeled) {
    if (labeled.samples.empty())
        throw ValidationError("error_rate: empty dataset");
    std::size_t wrong = 0;
    for (const auto& s : labeled.samples) {
        int c = classifier(s.features);
        check_label(c, "candidate");
        if (c != s.label) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(labeled.samples.size());
}

std::string format_percent(double fraction) {
    // Round half away from zero at two decimals of the percentage.
    double pct = std::round(fraction * 100.0 * 100.0) / 100.0;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f%%", pct);
    return buf;
}

std::string render_sweep_row(std::size_t n_real, std::size_t n_synth,
                             const DivergenceReport& report) {
    std::ostringstream out;
    out << (n_real + n_synth) << " | " << n_real << " | " << n_synth << " | "
        << format_percent(report.d1()) << " | " << format_percent(report.d2())
        << " | " << format_percent(report.d());
    return out.str();
}

std::string report_to_kv(const DivergenceReport& report) {
    char buf[256];
    std::ostringstream out;
    out << "n1 " << report.n1 << "\n";
    out << "n2 " << report.n2 << "\n";
    out << "m1 " << report.m1 << "\n";
    out << "m2 " << report.m2 << "\n";
    std::snprintf(buf, sizeof buf, "d1 %.17g\n", report.d1());
    out << buf;
    std::snprintf(buf, sizeof buf, "d2 %.17g\n", report.d2());
    out << buf;
    std::snprintf(buf, sizeof buf, "d %.17g\n", report.d());
    out << buf;
    std::snprintf(buf, sizeof buf, "d_max %.17g\n", report.d_max());
    out << buf;
    return out.str();
}

DivergenceReport report_from_kv(const std::string& text) {
    DivergenceReport rep;
    bool seen[4] = {false, false, false, false};
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "n1" || key == "n2" || key == "m1" || key == "m2") {
            unsigned long long v = 0;
            if (!(ls >> v))
                throw IoError("report line " + std::to_string(lineno) +
                              ": bad count for " + key);
            if (key == "n1") { rep.n1 = v; seen[0] = true; }
            else if (key == "n2") { rep.n2 = v; seen[1] = true; }
            else if (key == "m1") { rep.m1 = v; seen[2] = true; }
            else { rep.m2 = v; seen[3] = true; }
        }
        // d1/d2/d/d_max lines are derived; re-derived from the counts.
    }
    for (bool s : seen)
        if (!s) throw IoError("report is missing one of n1/n2/m1/m2");
    return rep;
}

}  // namespace amlab
