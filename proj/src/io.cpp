#include "spinglass/io.hpp"

#include <fstream>

#include <json.hpp>

#include "spinglass/rng.hpp"

namespace spinglass {

std::string flags_to_string(const std::vector<std::string>& flags) {
    std::string s;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (i) s += ";";
        s += flags[i];
    }
    return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << text;
}

void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<EstimateRow>& rows) {
    std::string out = "quantity,value,std_error,method,flags\n";
    for (auto& r : rows) {
        out += r.quantity + "," + format_double(r.value) + "," + format_double(r.std_error) +
               "," + r.method + "," + r.flags + "\n";
    }
    write_text(path, out);
}

void write_estimates_json(const std::filesystem::path& path,
                          const std::vector<EstimateRow>& rows) {
    nlohmann::ordered_json j = nlohmann::json::array();
    for (auto& r : rows) {
        nlohmann::ordered_json x;
        x["quantity"] = r.quantity;
        x["value"] = r.value;
        x["std_error"] = r.std_error;
        x["method"] = r.method;
        x["flags"] = r.flags;
        j.push_back(x);
    }
    write_text(path, j.dump(2) + "\n");
}

void save_disorder(const Disorder& d, const std::filesystem::path& json_path,
                   const std::filesystem::path& raw_path) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["generator_id"] = kGeneratorId;
    j["mixture"] = nlohmann::json::parse(d.mixture().to_json());
    j["dim"] = d.dim();
    j["seed"] = d.seed();
    j["raw_dump"] = raw_path.empty() ? "" : raw_path.filename().string();
    write_text(json_path, j.dump(2) + "\n");
    if (!raw_path.empty()) {
        std::ofstream f(raw_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + raw_path.string());
        for (auto& [p, g2] : d.mixture().coeffs()) {
            if (g2 <= 0) continue;
            const Vec& t = d.tensor(p);
            f.write(reinterpret_cast<const char*>(t.data()),
                    std::streamsize(sizeof(double)) * t.size());
        }
    }
}

Disorder load_disorder(const std::filesystem::path& json_path) {
    std::ifstream f(json_path);
    if (!f) throw std::runtime_error("cannot open " + json_path.string());
    nlohmann::json j = nlohmann::json::parse(f);
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("disorder file: unsupported format version");
    if (j.at("generator_id").get<std::string>() != kGeneratorId)
        throw std::runtime_error("disorder file: generator id mismatch, tensors would differ");
    Mixture m = Mixture::from_json(j.at("mixture").dump());
    return Disorder(m, j.at("dim").get<int>(), j.at("seed").get<std::uint64_t>());
}

void write_samples(const std::filesystem::path& path, const SampleSet& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    int dim = s.points.empty() ? 0 : int(s.points[0].dim());
    std::string header = "samples v1 count=" + std::to_string(s.points.size()) +
                         " dim=" + std::to_string(dim) + " beta=" + format_double(s.meta.beta) +
                         "\n";
    f << header;
    for (auto& p : s.points)
        f.write(reinterpret_cast<const char*>(p.coords.data()),
                std::streamsize(sizeof(double)) * p.coords.size());
}

std::vector<Vec> read_samples(const std::filesystem::path& path, int dim) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::string header;
    std::getline(f, header);
    std::vector<Vec> out;
    while (true) {
        Vec v(dim);
        f.read(reinterpret_cast<char*>(v.data()), std::streamsize(sizeof(double)) * dim);
        if (!f) break;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace spinglass
