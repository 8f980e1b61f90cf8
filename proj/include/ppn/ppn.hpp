#ifndef PPN_PPN_HPP
#define PPN_PPN_HPP

#include "ppn/claims.hpp"
#include "ppn/exports.hpp"
#include "ppn/graph.hpp"
#include "ppn/link_communities.hpp"
#include "ppn/pipeline.hpp"
#include "ppn/report.hpp"
#include "ppn/rng.hpp"
#include "ppn/stats.hpp"
#include "ppn/surrogate.hpp"

#endif  // PPN_PPN_HPP
