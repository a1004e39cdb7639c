#include "funfuse/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "funfuse/errors.hpp"

namespace funfuse {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw io_error("cannot write " + path);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::optional<double> parse_value(const std::string& s) {
    if (s.empty() || s == "NA" || s == "na" || s == "nan" || s == "NaN")
        return std::nullopt;
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw io_error("malformed numeric field: " + s);
    if (std::isnan(v)) return std::nullopt;
    return v;
}

}  // namespace

void write_data_csv(const std::string& path, const Dataset& dataset) {
    auto out = open_out(path);
    const bool loc = !dataset.samples.empty() &&
                     dataset.samples.front().location.has_value();
    out << "subject_id,t,value" << (loc ? ",lon,lat" : "") << "\n";
    for (const auto& s : dataset.samples)
        for (int j = 0; j < s.grid.size(); ++j) {
            out << s.subject_id << ',' << fmt(s.grid[j]) << ',' << fmt(s.values[j]);
            if (loc) out << ',' << fmt((*s.location)[0]) << ',' << fmt((*s.location)[1]);
            out << "\n";
        }
}

void write_responses_csv(const std::string& path, const Dataset& dataset) {
    auto out = open_out(path);
    out << "subject_id,y\n";
    for (const auto& s : dataset.samples)
        out << s.subject_id << ',' << fmt(s.response) << "\n";
}

void write_truth_json(const std::string& path, const Dataset& dataset,
                      const TruthRecord& truth) {
    ordered_json j;
    j["partition"] = json::array();
    for (const auto& group : truth.partition) {
        json ids = json::array();
        for (int i : group) ids.push_back(dataset.samples[i].subject_id);
        j["partition"].push_back(ids);
    }
    j["scenario"] = to_string(truth.scenario);
    if (dataset.has_coeffs()) {
        ordered_json coeffs;
        for (int i = 0; i < dataset.n(); ++i) {
            json a = json::array();
            for (int l = 0; l < dataset.coeffs.cols(); ++l)
                a.push_back(dataset.coeffs(i, l));
            coeffs[dataset.samples[i].subject_id] = a;
        }
        j["coeffs"] = coeffs;
    }
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

TruthFile load_truth_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read " + path);
    json j;
    in >> j;
    TruthFile t;
    for (const auto& group : j.at("partition")) {
        std::vector<std::string> ids;
        for (const auto& id : group) ids.push_back(id.get<std::string>());
        t.partition.push_back(std::move(ids));
    }
    t.scenario = j.value("scenario", "");
    if (j.contains("coeffs")) {
        for (const auto& [id, arr] : j.at("coeffs").items()) {
            Eigen::VectorXd a(arr.size());
            for (size_t l = 0; l < arr.size(); ++l) a[l] = arr[l].get<double>();
            t.coeffs.emplace_back(id, std::move(a));
        }
    }
    return t;
}

Dataset load_dataset(const std::string& data_csv, const std::string& responses_csv,
                     int q, int m, const std::optional<TruthFile>& truth,
                     LoadReport* report) {
    std::ifstream in(data_csv);
    if (!in) throw io_error("cannot read " + data_csv);
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty data file " + data_csv);
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "subject_id" || header[1] != "t" ||
        header[2] != "value")
        throw io_error("data file must start with header subject_id,t,value");
    const bool has_loc = header.size() >= 5;

    struct Raw {
        std::vector<double> t;
        std::vector<std::optional<double>> v;
        std::optional<std::array<double, 2>> loc;
    };
    std::vector<std::string> order;
    std::map<std::string, Raw> raw;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() < 3) throw io_error("malformed data row: " + line);
        auto it = raw.find(f[0]);
        if (it == raw.end()) {
            order.push_back(f[0]);
            it = raw.emplace(f[0], Raw{}).first;
        }
        it->second.t.push_back(*parse_value(f[1]));
        it->second.v.push_back(parse_value(f[2]));
        if (has_loc && f.size() >= 5 && !it->second.loc) {
            const auto lon = parse_value(f[3]), lat = parse_value(f[4]);
            if (lon && lat) it->second.loc = {{*lon, *lat}};
        }
    }

    std::ifstream rin(responses_csv);
    if (!rin) throw io_error("cannot read " + responses_csv);
    if (!std::getline(rin, line) || split_csv_line(line)[0] != "subject_id")
        throw io_error("responses file must start with header subject_id,y");
    std::map<std::string, double> responses;
    while (std::getline(rin, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() < 2) throw io_error("malformed response row: " + line);
        responses[f[0]] = *parse_value(f[1]);
    }

    double t_max = 0.0;
    for (const auto& [id, r] : raw)
        for (double t : r.t) t_max = std::max(t_max, t);
    if (!(t_max > 0.0)) throw io_error("observation times must reach past 0");

    Dataset ds(BSplineBasis(q, m, {0.0, t_max}));
    for (const auto& id : order) {
        auto& r = raw[id];
        const size_t total = r.v.size();
        size_t missing = 0;
        for (const auto& v : r.v)
            if (!v) ++missing;
        if (missing * 2 > total) {
            if (report) report->dropped.push_back(id);
            continue;
        }
        // sort by time, then linearly interpolate interior gaps
        std::vector<size_t> idx(total);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(),
                  [&](size_t a, size_t b) { return r.t[a] < r.t[b]; });
        std::vector<double> ts;
        std::vector<std::optional<double>> vs;
        for (size_t k : idx) {
            ts.push_back(r.t[k]);
            vs.push_back(r.v[k]);
        }
        size_t lo = 0, hi = total;
        while (lo < total && !vs[lo]) ++lo;
        while (hi > lo && !vs[hi - 1]) --hi;
        std::vector<double> gt, gv;
        for (size_t k = lo; k < hi; ++k) {
            if (vs[k]) {
                gt.push_back(ts[k]);
                gv.push_back(*vs[k]);
            } else {
                size_t next = k;
                while (!vs[next]) ++next;
                const double t0 = gt.back(), v0 = gv.back();
                const double t1 = ts[next], v1 = *vs[next];
                gt.push_back(ts[k]);
                gv.push_back(v0 + (v1 - v0) * (ts[k] - t0) / (t1 - t0));
            }
        }
        const auto resp = responses.find(id);
        if (resp == responses.end())
            throw io_error("subject " + id + " has no response");
        FunctionalSample s;
        s.subject_id = id;
        s.grid = Eigen::Map<Eigen::VectorXd>(gt.data(), gt.size());
        s.values = Eigen::Map<Eigen::VectorXd>(gv.data(), gv.size());
        s.response = resp->second;
        s.location = r.loc;
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw io_error("no usable subjects in " + data_csv);

    if (truth && !truth->coeffs.empty()) {
        std::map<std::string, const Eigen::VectorXd*> by_id;
        for (const auto& [id, a] : truth->coeffs) by_id[id] = &a;
        const int pc = static_cast<int>(truth->coeffs.front().second.size());
        ds.coeffs.resize(ds.n(), pc);
        for (int i = 0; i < ds.n(); ++i) {
            const auto it = by_id.find(ds.samples[i].subject_id);
            if (it == by_id.end())
                throw io_error("truth file lacks coefficients for subject " +
                               ds.samples[i].subject_id);
            ds.coeffs.row(i) = it->second->transpose();
        }
        ds.covariate_basis = BSplineBasis(5, pc - 5, {0.0, t_max});
    }
    ds.weights = Eigen::MatrixXd::Ones(ds.n(), ds.n());
    return ds;
}

std::vector<std::vector<int>> partition_to_indices(
    const std::vector<std::vector<std::string>>& partition, const Dataset& dataset) {
    std::map<std::string, int> index;
    for (int i = 0; i < dataset.n(); ++i) index[dataset.samples[i].subject_id] = i;
    std::vector<std::vector<int>> out;
    for (const auto& group : partition) {
        std::vector<int> g;
        for (const auto& id : group) {
            const auto it = index.find(id);
            if (it == index.end())
                throw invalid_argument("partition refers to unknown subject " + id);
            g.push_back(it->second);
        }
        out.push_back(std::move(g));
    }
    return out;
}

void write_result_json(const std::string& path, const FitResult& fit, double bic,
                       const Dataset& dataset) {
    ordered_json j;
    j["k_hat"] = fit.k_hat;
    j["partition"] = json::array();
    for (const auto& group : fit.partition) {
        json ids = json::array();
        for (int i : group) ids.push_back(dataset.samples[i].subject_id);
        j["partition"].push_back(ids);
    }
    j["alpha"] = json::array();
    for (int g = 0; g < fit.alpha.rows(); ++g) {
        json row = json::array();
        for (int l = 0; l < fit.alpha.cols(); ++l) row.push_back(fit.alpha(g, l));
        j["alpha"].push_back(row);
    }
    j["lambda1"] = fit.lambda1;
    j["lambda2"] = fit.lambda2;
    j["iters"] = fit.iters;
    j["converged"] = fit.converged;
    j["bic"] = bic;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

ResultFile load_result_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read " + path);
    json j;
    in >> j;
    ResultFile r;
    r.k_hat = j.at("k_hat").get<int>();
    for (const auto& group : j.at("partition")) {
        std::vector<std::string> ids;
        for (const auto& id : group) ids.push_back(id.get<std::string>());
        r.partition.push_back(std::move(ids));
    }
    const auto& alpha = j.at("alpha");
    if (!alpha.empty()) {
        r.alpha.resize(alpha.size(), alpha[0].size());
        for (size_t g = 0; g < alpha.size(); ++g)
            for (size_t l = 0; l < alpha[g].size(); ++l)
                r.alpha(g, l) = alpha[g][l].get<double>();
    }
    r.lambda1 = j.at("lambda1").get<double>();
    r.lambda2 = j.at("lambda2").get<double>();
    r.iters = j.at("iters").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.bic = j.at("bic").get<double>();
    return r;
}

void write_curves_csv(const std::string& path, const FitResult& fit,
                      const BSplineBasis& basis) {
    auto out = open_out(path);
    out << "group,t,beta_hat\n";
    const int npts = 201;
    for (int g = 0; g < fit.alpha.rows(); ++g)
        for (int j = 0; j < npts; ++j) {
            const double t = basis.domain().lo +
                             basis.domain().length() * j / (npts - 1);
            const double v = basis.eval(t).dot(fit.alpha.row(g));
            out << (g + 1) << ',' << fmt(t) << ',' << fmt(v) << "\n";
        }
}

}  // namespace funfuse
