#include "fraclap/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fraclap {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string tree_to_json_string(const DyadicTree& t) {
    nlohmann::json doc;
    const SpaceModel& model = t.model();
    doc["model"] = model.name();
    doc["J"] = t.maxLevel();
    doc["windowExponent"] = model.windowExponent();
    bool rationalMeasures = model.name() == "sierpinski";
    nlohmann::json cubes = nlohmann::json::array();
    for (int j = 0; j <= t.maxLevel(); ++j) {
        for (int i = 0; i < t.cubeCount(j); ++i) {
            const auto& q = t.cube(j, i);
            nlohmann::json c;
            c["address"] = model.formatAddress(q.address);
            c["level"] = j;
            c["measure"] = q.measure;
            if (rationalMeasures) {
                long long den = 1;
                for (int k = 0; k < j; ++k) den *= 3;
                c["measure_exact"] = "1/" + std::to_string(den);
            }
            c["parent"] = j == 0 ? nlohmann::json(nullptr) : nlohmann::json(model.formatAddress(q.address.parent()));
            nlohmann::json children = nlohmann::json::array();
            if (j < t.maxLevel())
                for (int k = 0; k < q.childCount; ++k)
                    children.push_back(model.formatAddress(t.cube(j + 1, q.firstChild + k).address));
            c["children"] = std::move(children);
            c["point"] = {q.rep.x, q.rep.y};
            cubes.push_back(std::move(c));
        }
    }
    doc["cubes"] = std::move(cubes);
    return doc.dump(2) + "\n";
}

std::string decomposition_to_csv(const HaarSystem& sys, const HaarDecomposition& d) {
    const DyadicTree& t = sys.tree();
    const SpaceModel& model = t.model();
    std::ostringstream out;
    out << "cube_address,level,cube_measure,wavelet_index,coefficient\n";
    out << model.formatAddress(Address()) << ",0," << format_double(t.cube(0, 0).measure) << ",-1,"
        << format_double(d.topScalingCoeff) << "\n";
    for (int id = 0; id < sys.waveletCount(); ++id) {
        const auto& h = sys.wavelet(id);
        out << model.formatAddress(t.cube(h.level, h.cubeIndex).address) << "," << h.level << ","
            << format_double(sys.baseCubeMeasure(id)) << "," << h.indexInCube << ","
            << format_double(d.waveletCoeffs[static_cast<std::size_t>(id)]) << "\n";
    }
    return out.str();
}

std::string solution_to_csv(const CellFunction& f) {
    const DyadicTree& t = f.tree();
    std::ostringstream out;
    out << "leaf_address,value\n";
    for (int i = 0; i < t.leafCount(); ++i)
        out << t.model().formatAddress(t.leaf(i).address) << "," << format_double(f[i]) << "\n";
    return out.str();
}

std::string plot_data_csv(const CellFunction& f) {
    const DyadicTree& t = f.tree();
    std::ostringstream out;
    out << "x,y,value\n";
    for (int i = 0; i < t.leafCount(); ++i) {
        const auto& rep = t.leaf(i).rep;
        out << format_double(rep.x) << "," << format_double(rep.y) << "," << format_double(f[i]) << "\n";
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

CellFunction read_cell_function_csv(const DyadicTree& t, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    CellFunction f(t);
    std::vector<bool> seen(static_cast<std::size_t>(t.leafCount()), false);
    std::string line;
    bool headerSkipped = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!headerSkipped && line.rfind("leaf_address", 0) == 0) {
            headerSkipped = true;
            continue;
        }
        headerSkipped = true;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("malformed CSV line: " + line);
        Address a = t.model().parseAddress(line.substr(0, comma));
        int idx = t.leafIndexOf(a);
        f[idx] = std::stod(line.substr(comma + 1));
        if (seen[static_cast<std::size_t>(idx)])
            throw std::runtime_error("leaf '" + line.substr(0, comma) + "' given twice");
        seen[static_cast<std::size_t>(idx)] = true;
    }
    for (int i = 0; i < t.leafCount(); ++i)
        if (!seen[static_cast<std::size_t>(i)])
            throw std::runtime_error("leaf '" + t.model().formatAddress(t.leaf(i).address) + "' missing from CSV");
    return f;
}

}  // namespace fraclap
