// SPDX-License-Identifier: Apache-2.0

#include "mcfl/linemap.hpp"

#include "mcfl/error.hpp"

namespace mcfl {

std::string synthetic_name(Synthetic k) {
  switch (k) {
    case Synthetic::None: return "original";
    case Synthetic::Framework: return "framework";
    case Synthetic::OrderControl: return "order-control";
    case Synthetic::Loopcounter: return "loopcounter";
    case Synthetic::MutexModel: return "mutex-model";
    case Synthetic::CondModel: return "cond-model";
    case Synthetic::UnwindCopy: return "unwind-copy";
  }
  return "?";
}

Synthetic synthetic_from_name(const std::string& name) {
  for (Synthetic k : {Synthetic::None, Synthetic::Framework, Synthetic::OrderControl, Synthetic::Loopcounter,
                      Synthetic::MutexModel, Synthetic::CondModel, Synthetic::UnwindCopy})
    if (synthetic_name(k) == name) return k;
  throw Error("unknown line origin '" + name + "'");
}

}  // namespace mcfl
