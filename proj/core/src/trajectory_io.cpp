#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "darksearch/trajectory.hpp"
#include "json.hpp"

namespace darksearch::trajectory {

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InvalidArgument("trajectory record: cannot parse number '" + s + "'");
    return v;
}

}  // namespace

void write_record(std::ostream& out, const TrajectoryRecord& record) {
    nlohmann::json header;
    header["units"] = "time in 1/gamma, detuning in gamma";
    header["seed"] = record.config.seed;
    header["stream"] = record.config.stream;
    header["config"] = {
        {"delta_max", record.config.delta_max},
        {"horizon", record.config.horizon},
        {"mode", std::string(to_string(record.config.mode))},
        {"initial_detuning", record.config.initial_detuning ? nlohmann::json(*record.config.initial_detuning)
                                                            : nlohmann::json(nullptr)},
    };
    header["params"] = {
        {"rabi", record.params.rabi}, {"gamma", record.params.gamma}};
    header["rng_draws"] = record.rng_draws;
    out << header.dump() << '\n';
    for (const auto& e : record.events)
        out << format_double(e.time) << ',' << e.channel << ',' << format_double(e.detuning_before) << '\n';
    out << "final," << format_double(record.config.horizon) << ',' << format_double(record.final_detuning) << '\n';
}

TrajectoryRecord read_record(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("trajectory record: missing header");
    const auto header = nlohmann::json::parse(line);
    TrajectoryRecord rec;
    const auto& cfg = header.at("config");
    rec.config.delta_max = cfg.at("delta_max").get<double>();
    rec.config.horizon = cfg.at("horizon").get<double>();
    rec.config.mode = parse_mode(cfg.at("mode").get<std::string>());
    if (!cfg.at("initial_detuning").is_null()) rec.config.initial_detuning = cfg.at("initial_detuning").get<double>();
    rec.config.seed = header.at("seed").get<std::uint64_t>();
    rec.config.stream = header.at("stream").get<std::uint64_t>();
    rec.params.rabi = header.at("params").at("rabi").get<double>();
    rec.params.gamma = header.at("params").at("gamma").get<double>();
    rec.rng_draws = header.value("rng_draws", std::uint64_t{0});

    bool finished = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw InvalidArgument("trajectory record: malformed line '" + line + "'");
        if (a == "final") {
            rec.config.horizon = parse_double(b);
            rec.final_detuning = parse_double(c);
            finished = true;
            break;
        }
        rec.events.push_back(TrajectoryEvent{parse_double(a), static_cast<int>(parse_double(b)), parse_double(c)});
    }
    if (!finished) throw InvalidArgument("trajectory record: missing final line");
    return rec;
}

}  // namespace darksearch::trajectory
