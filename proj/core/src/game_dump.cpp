#include "denserew/harness/game_dump.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>
#endif

#include "denserew/error.hpp"

namespace denserew::harness {

using nlohmann::json;

std::vector<scar::Token> GameDump::tokens() const {
  std::vector<scar::Token> out;
  for (const auto& u : units) out.insert(out.end(), u.begin(), u.end());
  return out;
}

std::vector<scar::Unit> GameDump::unit_ranges() const {
  std::vector<scar::Unit> out;
  std::size_t at = 0;
  for (const auto& u : units) {
    out.push_back({at, at + u.size()});
    at += u.size();
  }
  return out;
}

scar::CoalitionGame GameDump::game() const {
  if (units.empty()) throw Error(Errc::EmptySequence, "game dump has no units");
  if (units.size() > scar::kMaxPlayers) throw Error(Errc::TooManyPlayers, "game dump has more than 64 units");
  return scar::CoalitionGame(units.size(), [tokens = tokens(), ranges = unit_ranges(), evals = evaluations,
                                            placeholder = placeholder, oracle = oracle](scar::Coalition s) {
    if (auto it = evals.find(s); it != evals.end()) return it->second;
    if (!oracle)
      throw Error(Errc::ParseError, "coalition " + std::to_string(s) +
                                        " is not in the dump and no oracle is given");
    return oracle->score(scar::render_coalition(tokens, ranges, s, placeholder));
  });
}

GameDump GameDump::parse(const std::string& json_text) {
  GameDump d;
  try {
    const json j = json::parse(json_text);
    for (const auto& u : j.at("units")) {
      std::vector<scar::Token> toks;
      for (const auto& t : u) toks.push_back(t.get<std::string>());
      if (toks.empty()) throw Error(Errc::ParseError, "game dump contains an empty unit");
      d.units.push_back(std::move(toks));
    }
    if (j.contains("placeholder")) d.placeholder = j.at("placeholder").get<std::string>();
    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      ToyRewardOracle oracle;
      oracle.placeholder = d.placeholder;
      if (o.contains("weights"))
        for (const auto& [k, v] : o.at("weights").items()) oracle.weights[k] = v.get<double>();
      if (o.contains("bonuses"))
        for (const auto& b : o.at("bonuses")) {
          if (b.size() != 3) throw Error(Errc::ParseError, "bonus entries are [token, token, value]");
          oracle.set_bonus(b[0].get<std::string>(), b[1].get<std::string>(), b[2].get<double>());
        }
      if (o.contains("length_penalty")) oracle.length_penalty = o.at("length_penalty").get<double>();
      d.oracle = std::move(oracle);
    }
    if (j.contains("evaluations"))
      for (const auto& [k, v] : j.at("evaluations").items()) {
        std::size_t used = 0;
        const auto mask = std::stoull(k, &used);
        if (used != k.size()) throw Error(Errc::ParseError, "evaluation key '" + k + "' is not a bitmask");
        d.evaluations[mask] = v.get<double>();
      }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed game dump: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(Errc::ParseError, "evaluation keys must be decimal bitmasks");
  } catch (const std::out_of_range&) {
    throw Error(Errc::ParseError, "evaluation key out of range");
  }
  if (d.units.empty()) throw Error(Errc::EmptySequence, "game dump has no units");
  const auto all = scar::full_coalition(d.units.size());
  for (const auto& [mask, v] : d.evaluations)
    if (mask & ~all) throw Error(Errc::ParseError, "evaluation bitmask " + std::to_string(mask) + " names a missing unit");
  return d;
}

GameDump GameDump::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read game dump " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void GameDump::write(std::ostream& out, const scar::CoalitionGame* game) const {
  json j;
  j["units"] = units;
  j["placeholder"] = placeholder;
  if (oracle) {
    json o;
    o["weights"] = oracle->weights;
    json b = json::array();
    for (const auto& [pair, v] : oracle->bonuses) b.push_back({pair.first, pair.second, v});
    o["bonuses"] = b;
    o["length_penalty"] = oracle->length_penalty;
    j["oracle"] = o;
  }
  json ev = json::object();
  if (game) {
    for (const auto& [mask, v] : game->evaluations()) ev[std::to_string(mask)] = v;
  } else {
    for (const auto& [mask, v] : evaluations) ev[std::to_string(mask)] = v;
  }
  j["evaluations"] = ev;
  out << j.dump(2) << '\n';
}

}  // namespace denserew::harness
