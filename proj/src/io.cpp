#include "anchored/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace anchored {

using nlohmann::json;

namespace {

SampledFunction table_from_json(const json& j) {
  std::vector<double> nodes = j.at("nodes").get<std::vector<double>>();
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  return SampledFunction(std::move(nodes), std::move(values));
}

PriorSpec prior_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform")
    return PriorSpec::uniform(
        {j.at("lo").get<double>(), j.at("hi").get<double>()});
  if (kind == "gaussian")
    return PriorSpec::gaussian(j.at("mean").get<double>(),
                               j.at("sd").get<double>(),
                               j.value("trunc_sds", 8.0));
  if (kind == "tabulated") return PriorSpec::tabulated(table_from_json(j));
  throw InvalidSpec("unknown prior kind: " + kind);
}

PayoffSpec payoffs_from_json(const json& j) {
  const auto& recv = j.at("receiver");
  const auto& send = j.at("sender");
  if (recv.at("kind") != "quadratic" ||
      send.at("kind") != "quadratic_biased")
    throw InvalidSpec("model files support quadratic payoff families only");
  const double d = send.at("d").get<double>();
  const double kR = recv.value("kappa", 1.0);
  const double kS = send.value("kappa", 1.0);
  if (send.contains("delta_hat") && send.at("delta_hat").is_object()) {
    auto table = table_from_json(send.at("delta_hat"));
    auto dh = [table](double t) { return table(t); };
    auto dhp = [table](double t) { return table.derivative(t); };
    return PayoffSpec::quadratic_delta(d, dh, dhp, kR, kS);
  }
  const double dh = send.contains("delta_hat")
                        ? send.at("delta_hat").get<double>()
                        : 1.0;
  return PayoffSpec::quadratic_delta(
      d, [dh](double) { return dh; }, [](double) { return 0.0; }, kR, kS);
}

CostSpec cost_from_json(const json& j) {
  const double c = j.at("c").get<double>();
  const auto& shape = j.at("shape");
  const std::string kind = shape.at("kind").get<std::string>();
  if (kind == "quadratic") return CostSpec::quadratic(c);
  if (kind == "power") return CostSpec::power(c, shape.at("p").get<double>());
  throw InvalidSpec("unknown cost shape: " + kind);
}

AnchorSpec anchor_from_json(const json& j) {
  const double sigma = j.at("sigma").get<double>();
  const auto& b0 = j.at("b0");
  AnchorSpec base = [&] {
    if (b0.at("kind") == "affine")
      return AnchorSpec::affine_gaussian(b0.at("beta0").get<double>(),
                                         b0.at("beta").get<double>(), sigma);
    if (b0.at("kind") == "tabulated")
      return AnchorSpec::tabulated_b0(table_from_json(b0), sigma);
    throw InvalidSpec("unknown anchor b0 kind");
  }();
  if (j.contains("noise") && j.at("noise").at("kind") == "tabulated") {
    if (b0.at("kind") != "affine")
      throw InvalidSpec("tabulated noise requires an affine b0");
    return AnchorSpec::affine_noise(b0.at("beta0").get<double>(),
                                    b0.at("beta").get<double>(), sigma,
                                    table_from_json(j.at("noise")));
  }
  return base;
}

MessageSpace message_space_from_json(const json& j) {
  if (j.at("kind") == "whole_line") return MessageSpace::real_line();
  if (j.at("kind") == "compact")
    return MessageSpace::compact(
        {j.at("lo").get<double>(), j.at("hi").get<double>()});
  throw InvalidSpec("unknown message_space kind");
}

}  // namespace

ModelSpec model_from_json_text(const std::string& text) {
  json j = json::parse(text);
  ModelSpec m;
  m.prior = prior_from_json(j.at("prior"));
  m.payoffs = payoffs_from_json(j.at("payoffs"));
  m.cost = cost_from_json(j.at("cost"));
  m.anchor = anchor_from_json(j.at("anchor"));
  if (j.contains("message_space"))
    m.message_space = message_space_from_json(j.at("message_space"));
  return m;
}

ModelSpec model_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidSpec("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str());
}

ModelSpec model_from_json_text_with_overrides(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  json j = json::parse(text);
  for (const auto& [key, value] : overrides) {
    json::json_pointer ptr("/" +
                           [&] {
                             std::string k = key;
                             for (auto& ch : k)
                               if (ch == '.') ch = '/';
                             return k;
                           }());
    try {
      j[ptr] = std::stod(value);
    } catch (const std::invalid_argument&) {
      j[ptr] = value;
    }
  }
  return model_from_json_text(j.dump());
}

std::string model_to_json_text(const ModelSpec& m) {
  json j;
  switch (m.prior.kind()) {
    case PriorSpec::Kind::Uniform:
      j["prior"] = {{"kind", "uniform"},
                    {"lo", m.prior.support().lo},
                    {"hi", m.prior.support().hi}};
      break;
    case PriorSpec::Kind::Gaussian:
      j["prior"] = {{"kind", "gaussian"},
                    {"mean", m.prior.gaussian_mean()},
                    {"sd", m.prior.gaussian_sd()}};
      break;
    case PriorSpec::Kind::Tabulated:
      throw InvalidSpec("tabulated priors do not serialize");
  }
  if (!m.payoffs.quadratic_family())
    throw InvalidSpec("general payoffs do not serialize");
  j["payoffs"] = {{"receiver", {{"kind", "quadratic"},
                                {"kappa", m.payoffs.kappa_R()}}},
                  {"sender", {{"kind", "quadratic_biased"},
                              {"d", m.payoffs.bias()},
                              {"kappa", m.payoffs.kappa_S()}}}};
  if (m.cost.shape() == CostSpec::Shape::Quadratic)
    j["cost"] = {{"c", m.cost.c()}, {"shape", {{"kind", "quadratic"}}}};
  else
    throw InvalidSpec("only quadratic costs serialize");
  j["anchor"] = {{"sigma", m.anchor.sigma()},
                 {"b0", {{"kind", "affine"},
                         {"beta0", m.anchor.beta0()},
                         {"beta", m.anchor.beta()}}},
                 {"noise", {{"kind", "gaussian"}}}};
  if (m.message_space.whole_line)
    j["message_space"] = {{"kind", "whole_line"}};
  else
    j["message_space"] = {{"kind", "compact"},
                          {"lo", m.message_space.interval.lo},
                          {"hi", m.message_space.interval.hi}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

CsvWriter::CsvWriter(std::string path, std::string command,
                     std::map<std::string, std::string> metadata)
    : path_(std::move(path)) {
  json meta;
  meta["command"] = command;
  meta["version"] = "1.0.0";
  for (const auto& [k, v] : metadata) meta[k] = v;
  buffer_ = "# " + meta.dump() + "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  row_raw(columns);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row_raw(cells);
}

void CsvWriter::row_raw(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

void CsvWriter::close() {
  if (closed_) return;
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw InvalidSpec("cannot write output file: " + path_);
  out << buffer_;
  closed_ = true;
}

}  // namespace anchored
