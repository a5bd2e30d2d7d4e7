#include "ickem/fixtures.hpp"

namespace ickem::fixtures {

const std::vector<SampleDocument>& probability_documents() {
  static const std::vector<SampleDocument> docs{
      {"D1", "SSP",
       "A Strictly Stationary Process (SSP) is a Stochastic Process (SP) whose Joint Probability Distribution "
       "(JPD) does not change when shifted in time.",
       {"SSP", "JPD", "Time", "SP"}},
      {"D2", "SP",
       "A Stochastic Process (SP) is a Probability Model (PM) used to describe phenomena that evolve over time "
       "or space. In probability theory, a stochastic process is a Time Sequence (TS) representing the evolution "
       "of some system represented by a variable whose change is subject to a Random Variation (RaV).",
       {"SP", "PM", "TS", "Time", "Space", "System", "Variable", "RaV"}},
      {"D3", "JPD",
       "In the study of probability, given at least two Random Variables (RV) X, Y, ... that are defined on a "
       "Probability Space (PS), the Joint Probability Distribution (JPD) for X, Y, ... is a Probability "
       "Distribution (PD) that gives the probability that each of X, Y, ... falls in any particular range or "
       "discrete set of values specified for that variable.",
       {"JPD", "RV", "PS", "PD", "Variable", "Probability"}},
      {"D4", "PM",
       "A Probability model (PM) is a mathematical representation of a random phenomenon. It is defined by its "
       "Sample Space (SS), events within the SS, and probabilities associated with each event.",
       {"PM", "SS", "Event", "Probability"}},
      {"D5", "RV",
       "In probability and statistics, a Random variable (RV) is a variable quantity whose possible values "
       "depend, in some clearly-defined way, on a set of random events.",
       {"RV", "Variable", "Event"}},
      {"D6", "PS",
       "A Probability Space (PS) is a Mathematical Construct (MC) that models a real-world process consisting "
       "of states that occur randomly. It consists of three parts: a Sample Space (SS), a set of events, and "
       "the assignment of probabilities to the events.",
       {"PS", "MC", "SS", "Probability", "Event"}},
      {"D7", "PD",
       "A Probability Distribution (PD) is a table or an equation that links each outcome of a statistical "
       "experiment with its probability of occurrence.",
       {"PD", "Probability"}},
      {"D8", "SS", "The Sample Space (SS) is the set of all possible outcomes of the samples.", {"SS", "Sample"}},
  };
  return docs;
}

std::vector<caiml::DocumentProfile> probability_profiles() {
  std::vector<caiml::DocumentProfile> out;
  for (const auto& d : probability_documents()) out.push_back(caiml::profile_from_refs(d.id, d.kps, d.defines));
  return out;
}

std::set<KpId> probability_bkps() {
  std::set<KpId> defined, all;
  for (const auto& d : probability_documents()) {
    defined.insert(d.defines);
    all.insert(d.kps.begin(), d.kps.end());
  }
  std::set<KpId> out;
  for (const auto& kp : all) {
    if (!defined.contains(kp)) out.insert(kp);
  }
  return out;
}

textshare::KpDictionary probability_dictionary() {
  const std::set<KpId> bkps = probability_bkps();
  const std::vector<std::pair<KpId, std::vector<std::string>>> names{
      {"SSP", {"strictly stationary process", "ssp"}},
      {"SP", {"stochastic process", "sp"}},
      {"JPD", {"joint probability distribution", "jpd"}},
      {"PM", {"probability model", "pm"}},
      {"RV", {"random variable", "random variables", "rv"}},
      {"PS", {"probability space", "ps"}},
      {"PD", {"probability distribution", "pd"}},
      {"SS", {"sample space", "ss"}},
      {"Time", {"time"}},
      {"Space", {"space"}},
      {"System", {"system"}},
      {"Variable", {"variable"}},
      {"RaV", {"random variation", "rav"}},
      {"TS", {"time sequence", "ts"}},
      {"Probability", {"probability", "probabilities"}},
      {"Event", {"event", "events"}},
      {"Sample", {"sample", "samples"}},
      {"MC", {"mathematical construct", "mc"}},
  };
  std::vector<textshare::KpEntry> entries;
  for (const auto& [id, aliases] : names) entries.push_back({id, aliases.front(), aliases, bkps.contains(id)});
  return textshare::KpDictionary(std::move(entries));
}

std::vector<DocId> worked_example_order() { return {"D5", "D8", "D4", "D2", "D7", "D6", "D3", "D1"}; }

const std::vector<CltDefinition>& clt_sources() {
  static const std::vector<CltDefinition> defs{
      {"The Central Limit Theorem (CLT) states that the sampling distribution of the mean of any independent, "
       "random variable will be normal or nearly normal, if the sample size is large enough.",
       {"sample", "distribution", "mean", "independent", "random variable", "normal", "size"}},
      {"The Central Limit Theorem (CLT) states that the distribution of the sum (or average) of a large number "
       "of independent, identically distributed variables will be approximately normal, regardless of the "
       "underlying distribution.",
       {"distribution", "sum", "average", "independent", "variable", "normal"}},
      {"The Central Limit Theorem (CLT) states that if you have a population with mean \xce\xbc and standard "
       "deviation \xcf\x83 and take sufficiently large random samples from the population with replacement, "
       "then the distribution of the sample means will be approximately normally distributed.",
       {"population", "standard deviation", "random", "replacement", "distribution", "sample", "mean", "normal"}},
  };
  return defs;
}

std::vector<tree::Definition> clt_definitions() {
  std::vector<tree::Definition> out;
  for (const auto& d : clt_sources()) out.push_back({kClt, d.text, {d.kps.begin(), d.kps.end()}});
  return out;
}

textshare::KpDictionary clt_dictionary() {
  const std::vector<std::pair<KpId, std::vector<std::string>>> names{
      {kClt, {"central limit theorem", "clt"}},
      {"sample", {"sample", "samples", "sampling"}},
      {"distribution", {"distribution", "distributed"}},
      {"mean", {"mean", "means"}},
      {"independent", {"independent"}},
      {"random variable", {"random variable"}},
      {"normal", {"normal", "normally"}},
      {"size", {"size"}},
      {"sum", {"sum"}},
      {"average", {"average"}},
      {"variable", {"variable", "variables"}},
      {"population", {"population"}},
      {"standard deviation", {"standard deviation"}},
      {"random", {"random"}},
      {"replacement", {"replacement"}},
  };
  std::vector<textshare::KpEntry> entries;
  for (const auto& [id, aliases] : names) entries.push_back({id, id, aliases, id != kClt});
  return textshare::KpDictionary(std::move(entries));
}

}  // namespace ickem::fixtures
