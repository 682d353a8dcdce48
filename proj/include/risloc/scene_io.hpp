// Scene file parsing and writing. The format is a sectioned key/value text
// document:
//
//   wavelength = 0.1        # meters
//   snapshots  = 500
//   snr_db     = 10         # or "inf" for noiseless
//   seed       = 1
//
//   [transmit]              # one "x y z" row per element, meters
//   0.0 0.0 3.0
//   ...
//   [receive]
//   ...
//   [ris]
//   ...
//   [ris_phases]            # radians, one per line; omitted -> all zeros
//   ...
//   [targets]               # theta_t phi_t theta_r phi_r zeta rho, degrees
//   45 25 50 21 30 20
//
// Also provides the debug tensor dump: three little-endian int64 dimensions
// followed by real/imag float32 pairs.
#ifndef RISLOC_SCENE_IO_HPP
#define RISLOC_SCENE_IO_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "risloc/tensor.hpp"
#include "risloc/types.hpp"

namespace risloc {

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& s) {
    auto h = s.find('#');
    return h == std::string::npos ? s : s.substr(0, h);
}

inline std::vector<double> parse_row(const std::string& line, const char* what) {
    std::istringstream iss(line);
    std::vector<double> vals;
    double v;
    while (iss >> v) vals.push_back(v);
    if (!iss.eof()) throw ConfigError(std::string("malformed numeric row in ") + what);
    return vals;
}

inline MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows, int cols,
                               const char* what) {
    MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) != cols)
            throw ConfigError(std::string("wrong column count in ") + what);
        for (int j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
    return m;
}

}  // namespace detail

inline SceneConfig parse_scene(std::istream& in) {
    SceneConfig scene;
    std::string section;
    std::vector<std::vector<double>> transmit, receive, ris, phases, targets;
    bool have_snr = false;

    std::string raw;
    while (std::getline(in, raw)) {
        std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        if (section.empty()) {
            auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("expected key = value: " + line);
            std::string key = detail::trim(line.substr(0, eq));
            std::string val = detail::trim(line.substr(eq + 1));
            if (key == "wavelength")
                scene.geometry.wavelength = std::stod(val);
            else if (key == "snapshots")
                scene.snapshots = std::stoi(val);
            else if (key == "snr_db") {
                scene.snr_db = (val == "inf") ? std::numeric_limits<double>::infinity()
                                              : std::stod(val);
                have_snr = true;
            } else if (key == "seed")
                scene.rng_seed = std::stoull(val);
            else
                throw ConfigError("unknown scene key: " + key);
            continue;
        }
        auto row = detail::parse_row(line, section.c_str());
        if (section == "transmit")
            transmit.push_back(row);
        else if (section == "receive")
            receive.push_back(row);
        else if (section == "ris")
            ris.push_back(row);
        else if (section == "ris_phases")
            phases.push_back(row);
        else if (section == "targets")
            targets.push_back(row);
        else
            throw ConfigError("unknown scene section: " + section);
    }
    (void)have_snr;

    scene.geometry.transmit = detail::rows_to_matrix(transmit, 3, "transmit");
    scene.geometry.receive = detail::rows_to_matrix(receive, 3, "receive");
    scene.geometry.ris = detail::rows_to_matrix(ris, 3, "ris");
    for (const auto& row : targets) {
        if (row.size() != 6) throw ConfigError("target rows need 6 angles (degrees)");
        Target t;
        t.dod = {deg2rad(row[0]), deg2rad(row[1])};
        t.doa = {deg2rad(row[2]), deg2rad(row[3])};
        t.pol = {deg2rad(row[4]), deg2rad(row[5])};
        scene.targets.push_back(t);
    }
    if (phases.empty()) {
        scene.ris_phases = VectorXcd::Ones(scene.geometry.num_ris());
    } else {
        scene.ris_phases.resize(static_cast<Eigen::Index>(phases.size()));
        for (std::size_t q = 0; q < phases.size(); ++q) {
            if (phases[q].size() != 1) throw ConfigError("ris_phases rows hold one angle each");
            scene.ris_phases[static_cast<Eigen::Index>(q)] = std::polar(1.0, phases[q][0]);
        }
    }
    scene.validate();
    return scene;
}

inline SceneConfig load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scene file: " + path);
    return parse_scene(in);
}

inline void write_scene(std::ostream& out, const SceneConfig& scene) {
    out.precision(17);
    out << "wavelength = " << scene.geometry.wavelength << "\n";
    out << "snapshots = " << scene.snapshots << "\n";
    if (std::isfinite(scene.snr_db))
        out << "snr_db = " << scene.snr_db << "\n";
    else
        out << "snr_db = inf\n";
    out << "seed = " << scene.rng_seed << "\n";
    auto dump = [&](const char* name, const MatrixXd& m) {
        out << "\n[" << name << "]\n";
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out << m(i, 0) << " " << m(i, 1) << " " << m(i, 2) << "\n";
    };
    dump("transmit", scene.geometry.transmit);
    dump("receive", scene.geometry.receive);
    dump("ris", scene.geometry.ris);
    out << "\n[ris_phases]\n";
    for (Eigen::Index q = 0; q < scene.ris_phases.size(); ++q)
        out << std::arg(scene.ris_phases[q]) << "\n";
    out << "\n[targets]\n";
    for (const Target& t : scene.targets)
        out << rad2deg(t.dod.azimuth) << " " << rad2deg(t.dod.elevation) << " "
            << rad2deg(t.doa.azimuth) << " " << rad2deg(t.doa.elevation) << " "
            << rad2deg(t.pol.aux) << " " << rad2deg(t.pol.phase) << "\n";
}

inline void save_scene(const std::string& path, const SceneConfig& scene) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write scene file: " + path);
    write_scene(out, scene);
}

inline void dump_tensor(const std::string& path, const Tensor3& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write tensor dump: " + path);
    std::int64_t dims[3] = {t.dim(0), t.dim(1), t.dim(2)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        float re = static_cast<float>(t.raw()[i].real());
        float im = static_cast<float>(t.raw()[i].imag());
        out.write(reinterpret_cast<const char*>(&re), sizeof(float));
        out.write(reinterpret_cast<const char*>(&im), sizeof(float));
    }
}

inline Tensor3 read_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read tensor dump: " + path);
    std::int64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in || dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
        throw ConfigError("corrupt tensor dump header");
    Tensor3 t(dims[0], dims[1], dims[2]);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        float re, im;
        in.read(reinterpret_cast<char*>(&re), sizeof(float));
        in.read(reinterpret_cast<char*>(&im), sizeof(float));
        t.raw()[i] = cplx(re, im);
    }
    if (!in) throw ConfigError("truncated tensor dump");
    return t;
}

}  // namespace risloc

#endif
