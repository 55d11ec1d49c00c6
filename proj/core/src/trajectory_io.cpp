#include <nhlab/integrate.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace nhlab {

namespace {

void put_number(std::ostream &out, double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
}

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') {
            cell.pop_back();
        }
        cells.push_back(cell);
    }
    return cells;
}

double parse_number(const std::string &cell, int line) {
    char *end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw ContractViolation("trajectory CSV line " + std::to_string(line) + ": bad number '" + cell + "'");
    }
    return v;
}

template <class T> void put_le(std::ostream &out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.put(static_cast<char>((bits >> (8 * i)) & 0xffu));
    }
}

template <class T> T get_le(std::istream &in) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) {
            throw ContractViolation("trajectory binary: unexpected end of stream");
        }
        bits |= static_cast<U>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return std::bit_cast<T>(bits);
}

} // namespace

void write_trajectory_csv(const Trajectory &traj, std::ostream &out) {
    const bool with_lambda = !traj.multipliers.empty();
    out << "t";
    for (int i = 0; i < traj.n; ++i) {
        out << ",q" << i;
    }
    for (int i = 0; i < traj.n; ++i) {
        out << ",qdot" << i;
    }
    if (with_lambda) {
        for (int i = 0; i < traj.k; ++i) {
            out << ",lambda" << i;
        }
    }
    out << ",residual\n";
    for (std::size_t r = 0; r < traj.size(); ++r) {
        const auto &s = traj.states[r];
        put_number(out, traj.times[r]);
        for (int i = 0; i < traj.n; ++i) {
            out << ',';
            put_number(out, s.q[i]);
        }
        for (int i = 0; i < traj.n; ++i) {
            out << ',';
            put_number(out, s.qdot[i]);
        }
        if (with_lambda) {
            for (int i = 0; i < traj.k; ++i) {
                out << ',';
                put_number(out, traj.multipliers[r][i]);
            }
        }
        out << ',';
        put_number(out, r < traj.residuals.size() ? traj.residuals[r] : std::nan(""));
        out << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ContractViolation("trajectory CSV: missing header");
    }
    const auto header = split_csv(line);
    int n = 0;
    int nd = 0;
    int k = 0;
    for (const auto &h : header) {
        if (h.rfind("qdot", 0) == 0) {
            ++nd;
        } else if (h.rfind("q", 0) == 0) {
            ++n;
        } else if (h.rfind("lambda", 0) == 0) {
            ++k;
        }
    }
    const std::size_t expected = static_cast<std::size_t>(2 + 2 * n + k);
    if (header.empty() || header.front() != "t" || header.back() != "residual" || n != nd || n < 1 ||
        header.size() != expected) {
        throw ContractViolation("trajectory CSV: unexpected header '" + line + "'");
    }

    Trajectory traj;
    traj.n = n;
    traj.k = k;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != expected) {
            throw ContractViolation("trajectory CSV line " + std::to_string(line_no) + ": wrong column count");
        }
        std::size_t c = 0;
        VelocityState s;
        s.t = parse_number(cells[c++], line_no);
        s.q.resize(n);
        s.qdot.resize(n);
        for (int i = 0; i < n; ++i) {
            s.q[i] = parse_number(cells[c++], line_no);
        }
        for (int i = 0; i < n; ++i) {
            s.qdot[i] = parse_number(cells[c++], line_no);
        }
        if (k > 0) {
            Vec lambda(k);
            for (int i = 0; i < k; ++i) {
                lambda[i] = parse_number(cells[c++], line_no);
            }
            traj.multipliers.push_back(std::move(lambda));
        }
        traj.residuals.push_back(parse_number(cells[c++], line_no));
        traj.times.push_back(s.t);
        traj.states.push_back(std::move(s));
    }
    return traj;
}

void write_trajectory_binary(const Trajectory &traj, std::ostream &out) {
    out.write("NHTR", 4);
    put_le<std::uint32_t>(out, kTrajectoryBinaryVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(traj.n));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(traj.k));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(traj.size()));
    const double missing = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t r = 0; r < traj.size(); ++r) {
        const auto &s = traj.states[r];
        put_le<double>(out, traj.times[r]);
        for (int i = 0; i < traj.n; ++i) {
            put_le<double>(out, s.q[i]);
        }
        for (int i = 0; i < traj.n; ++i) {
            put_le<double>(out, s.qdot[i]);
        }
        for (int i = 0; i < traj.k; ++i) {
            put_le<double>(out, traj.multipliers.empty() ? missing : traj.multipliers[r][i]);
        }
        put_le<double>(out, r < traj.residuals.size() ? traj.residuals[r] : missing);
    }
}

Trajectory read_trajectory_binary(std::istream &in) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "NHTR") {
        throw ContractViolation("trajectory binary: bad magic");
    }
    const auto version = get_le<std::uint32_t>(in);
    if (version != kTrajectoryBinaryVersion) {
        throw ContractViolation("trajectory binary: unsupported version " + std::to_string(version));
    }
    Trajectory traj;
    traj.n = static_cast<int>(get_le<std::uint32_t>(in));
    traj.k = static_cast<int>(get_le<std::uint32_t>(in));
    const auto count = get_le<std::uint64_t>(in);
    require(traj.n >= 1 && traj.n < (1 << 20) && traj.k < (1 << 20), "trajectory binary: implausible header");
    for (std::uint64_t r = 0; r < count; ++r) {
        VelocityState s;
        s.t = get_le<double>(in);
        s.q.resize(traj.n);
        s.qdot.resize(traj.n);
        for (int i = 0; i < traj.n; ++i) {
            s.q[i] = get_le<double>(in);
        }
        for (int i = 0; i < traj.n; ++i) {
            s.qdot[i] = get_le<double>(in);
        }
        Vec lambda(traj.k);
        for (int i = 0; i < traj.k; ++i) {
            lambda[i] = get_le<double>(in);
        }
        traj.multipliers.push_back(std::move(lambda));
        traj.residuals.push_back(get_le<double>(in));
        traj.times.push_back(s.t);
        traj.states.push_back(std::move(s));
    }
    return traj;
}

} // namespace nhlab
