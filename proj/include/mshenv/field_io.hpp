#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <string>

#include "field.hpp"

namespace mshenv {

// Binary layout (little-endian host order):
//   "MSHF" | u32 version | i32 n | i32 N | i32 shape | f64 R | f64 dx |
//   u64 count | f64 values[count] | u8 mask[count]
// Masked values are stored as -inf.
inline constexpr std::uint32_t kFieldFormatVersion = 1;

inline void write_field_binary(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("io", "cannot open " + path);
    const Domain& d = f.domain();
    const std::int32_t n = d.n(), N = d.nodes_per_axis(), shape = d.shape() == Shape::Ball ? 0 : 1;
    const double R = d.radius(), dx = d.dx();
    const std::uint64_t count = f.size();
    os.write("MSHF", 4);
    os.write(reinterpret_cast<const char*>(&kFieldFormatVersion), sizeof kFieldFormatVersion);
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(&N), sizeof N);
    os.write(reinterpret_cast<const char*>(&shape), sizeof shape);
    os.write(reinterpret_cast<const char*>(&R), sizeof R);
    os.write(reinterpret_cast<const char*>(&dx), sizeof dx);
    os.write(reinterpret_cast<const char*>(&count), sizeof count);
    os.write(reinterpret_cast<const char*>(f.values().data()), static_cast<std::streamsize>(count * sizeof(double)));
    os.write(reinterpret_cast<const char*>(f.mask().data()), static_cast<std::streamsize>(count));
    if (!os) throw Error("io", "write failed for " + path);
}

inline ScalarField read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("io", "cannot open " + path);
    char magic[4];
    std::uint32_t version = 0;
    std::int32_t n = 0, N = 0, shape = 0;
    double R = 0, dx = 0;
    std::uint64_t count = 0;
    is.read(magic, 4);
    if (std::memcmp(magic, "MSHF", 4) != 0) throw Error("io", path + " is not a field file");
    is.read(reinterpret_cast<char*>(&version), sizeof version);
    if (version != kFieldFormatVersion) throw Error("io", "unsupported field version in " + path);
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    is.read(reinterpret_cast<char*>(&N), sizeof N);
    is.read(reinterpret_cast<char*>(&shape), sizeof shape);
    is.read(reinterpret_cast<char*>(&R), sizeof R);
    is.read(reinterpret_cast<char*>(&dx), sizeof dx);
    is.read(reinterpret_cast<char*>(&count), sizeof count);
    auto dom = make_domain(n, R, N, shape == 0 ? Shape::Ball : Shape::Box);
    if (count != dom->size()) throw Error("io", "node count mismatch in " + path);
    std::vector<double> vals(count);
    std::vector<std::uint8_t> mask(count);
    is.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(count * sizeof(double)));
    is.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(count));
    if (!is) throw Error("io", "truncated field file " + path);
    ScalarField f(dom);
    for (std::size_t i = 0; i < count; ++i) {
        if (mask[i])
            f.set_neg_inf(i);
        else
            f.set(i, vals[i]);
    }
    return f;
}

// CSV with a commented header; one row per node (interior nodes only when
// `interior_only`). Columns: node, coordinates, value, mask.
inline void write_field_csv(const ScalarField& f, const std::string& path, bool interior_only = true) {
    std::ofstream os(path);
    if (!os) throw Error("io", "cannot open " + path);
    const Domain& d = f.domain();
    os << "# n=" << d.n() << " shape=" << to_string(d.shape()) << " R=" << d.radius() << " N=" << d.nodes_per_axis()
       << " dx=" << std::setprecision(17) << d.dx() << "\n";
    os << "node";
    static const char* names[] = {"x1", "y1", "x2", "y2"};
    for (int a = 0; a < d.axes(); ++a) os << ',' << names[a];
    os << ",value,mask\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (interior_only && !d.is_interior(i)) continue;
        os << i;
        for (int a = 0; a < d.axes(); ++a) os << ',' << d.coord(i, a);
        os << ',';
        if (f.masked(i))
            os << "-inf";
        else
            os << f[i];
        os << ',' << int(f.masked(i)) << '\n';
    }
}

}  // namespace mshenv
