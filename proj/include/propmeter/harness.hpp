#pragma once

// Experiment orchestration behind the command-line tool: load instances,
// measure runs, and write CSV reports.
//
// Output files (all with a header row):
//
//   summary.csv                 instance,variant,status,rounds,fixpoint,n_total,max_score,
//                               weakest_cap_hit,message
//   <id>.<variant>.progress.csv instance,variant,round,time_ns,n_current,p_inf,p_fin_raw,
//                               p_fin_norm
//   <id>.<variant>.trace.csv    round,changes,inf_reductions,duration_ns
//   <id>.<variant>.curves.csv   phase,round,time_ns,t,progress
//   <id>.weakest.csv            variable,lower,upper
//   compare.csv                 instance,phase,progress,t_baseline_ns,t_candidate_ns,speedup,
//                               floored,included
//   verify.csv                  instance,status,message
//   stall.csv                   p,q,stalls_immediate,stalls_deferred
//   manifest.txt                key=value run configuration
//
// Undefined values are empty fields. Runs are processed by a pool of
// `workers` threads; timings of concurrently processed instances perturb each
// other, so use one worker for timing-sensitive experiments. Results are
// always ordered by instance id.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "propmeter/compare.hpp"
#include "propmeter/csv.hpp"
#include "propmeter/mps.hpp"
#include "propmeter/progress.hpp"
#include "propmeter/propagator.hpp"
#include "propmeter/stall.hpp"
#include "propmeter/text_format.hpp"
#include "propmeter/weakest_bounds.hpp"

namespace propmeter
{

enum ExitCode : int
{
   kExitSuccess = 0,
   kExitPartialFailure = 1,
   kExitTotalFailure = 2,
   kExitInvalidConfig = 3
};

class ConfigError : public std::invalid_argument
{
 public:
   using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig
{
   std::vector<std::filesystem::path> instances;
   std::vector<Variant> variants{ Variant::kImmediate, Variant::kDeferred };
   /// The variant field is overridden per run.
   PropagationConfig propagation;
   WeakestBoundsOptions weakest;
   std::filesystem::path out_dir;
   std::vector<StallParams> stall_grid = default_stall_grid();
   std::vector<double> progress_grid = default_progress_grid();
   /// Speedup = t(baseline) / t(candidate).
   Variant baseline = Variant::kImmediate;
   Variant candidate = Variant::kDeferred;
   unsigned workers = 1;
   double verify_rel_tol = 1e-6;

   void
   validate() const
   {
      if( instances.empty() )
         throw ConfigError( "no instances given" );
      if( variants.empty() )
         throw ConfigError( "no variants given" );
      if( workers == 0 )
         throw ConfigError( "workers must be at least 1" );
      for( double x : progress_grid )
         if( !( x > 0.0 ) || x > 100.0 )
            throw ConfigError( "progress grid values must lie in (0, 100]" );
      for( const auto& g : stall_grid )
         if( !( g.p >= 0.0 ) || !( g.q >= 0.0 ) )
            throw ConfigError( "stall parameters must be non-negative" );
      try
      {
         propagation.validate( 0 );
      }
      catch( const std::invalid_argument& e )
      {
         throw ConfigError( e.what() );
      }
   }
};

struct LoadedInstance
{
   std::string id;
   std::filesystem::path path;
   std::optional<ProblemInstance> instance;
   std::vector<std::string> warnings;
   std::string error;
};

/// Instance id: file name without its last extension.
inline std::string
instance_id( const std::filesystem::path& path )
{
   return path.stem().string();
}

/// Ids for a set of paths. Paths sharing a stem keep their full file name,
/// and paths sharing a file name keep the whole path with '/' replaced by '_'.
inline std::vector<std::string>
instance_ids( const std::vector<std::filesystem::path>& paths )
{
   std::map<std::string, int> stems, names;
   for( const auto& p : paths )
   {
      ++stems[instance_id( p )];
      ++names[p.filename().string()];
   }
   std::vector<std::string> ids;
   for( const auto& p : paths )
   {
      if( stems[instance_id( p )] == 1 )
         ids.push_back( instance_id( p ) );
      else if( names[p.filename().string()] == 1 )
         ids.push_back( p.filename().string() );
      else
      {
         std::string id = p.string();
         std::replace( id.begin(), id.end(), '/', '_' );
         ids.push_back( id );
      }
   }
   return ids;
}

/// Reads an instance file: `.mps` files as MPS, anything else as the
/// canonical text format. Never throws; failures are reported in `error`.
inline LoadedInstance
load_instance( const std::filesystem::path& path )
{
   LoadedInstance out;
   out.id = instance_id( path );
   out.path = path;
   std::ifstream in( path, std::ios::binary );
   if( !in )
   {
      out.error = "cannot open " + path.string();
      return out;
   }
   std::stringstream buf;
   buf << in.rdbuf();
   const std::string text = buf.str();
   try
   {
      std::string ext = path.extension().string();
      std::transform( ext.begin(), ext.end(), ext.begin(),
                      []( unsigned char c ) { return static_cast<char>( std::tolower( c ) ); } );
      if( ext == ".mps" )
      {
         auto res = parse_mps( text );
         for( const auto& w : res.diagnostics.warnings )
            out.warnings.push_back( "line " + std::to_string( w.line ) + ": " + w.message );
         out.instance = std::move( res.instance );
      }
      else
         out.instance = parse_instance_text( text );
   }
   catch( const std::exception& e )
   {
      out.error = e.what();
   }
   return out;
}

enum class OutcomeStatus
{
   kMeasured,
   kNoChanges,
   kInfeasible,
   kFailed
};

inline const char*
to_string( OutcomeStatus s )
{
   switch( s )
   {
   case OutcomeStatus::kMeasured:
      return "measured";
   case OutcomeStatus::kNoChanges:
      return "no_changes";
   case OutcomeStatus::kInfeasible:
      return "infeasible";
   default:
      return "failed";
   }
}

struct VariantOutcome
{
   Variant variant = Variant::kImmediate;
   OutcomeStatus status = OutcomeStatus::kFailed;
   std::optional<MeasuredRun> run;
   std::optional<PropagationTrace> infeasible_trace;
   std::string message;
};

struct InstanceRecord
{
   std::string id;
   std::filesystem::path path;
   std::optional<ProblemInstance> instance;
   std::vector<std::string> warnings;
   std::string load_error;
   std::optional<WeakestBounds> weakest;
   std::vector<VariantOutcome> outcomes;

   bool
   failed() const
   {
      if( !load_error.empty() )
         return true;
      return std::any_of( outcomes.begin(), outcomes.end(), []( const VariantOutcome& o ) {
         return o.status == OutcomeStatus::kFailed;
      } );
   }

   const VariantOutcome*
   outcome( Variant v ) const
   {
      for( const auto& o : outcomes )
         if( o.variant == v )
            return &o;
      return nullptr;
   }
};

/// Runs `work(i)` for i in [0, count) on `workers` threads.
template <typename Work>
void
parallel_for( std::size_t count, unsigned workers, Work&& work )
{
   if( workers <= 1 || count <= 1 )
   {
      for( std::size_t i = 0; i < count; ++i )
         work( i );
      return;
   }
   std::atomic<std::size_t> next{ 0 };
   std::vector<std::thread> pool;
   const unsigned n = std::min<unsigned>( workers, static_cast<unsigned>( count ) );
   for( unsigned w = 0; w < n; ++w )
      pool.emplace_back( [&] {
         for( std::size_t i = next++; i < count; i = next++ )
            work( i );
      } );
   for( auto& t : pool )
      t.join();
}

inline VariantOutcome
measure_variant( const ProblemInstance& inst, const PropagationConfig& base, Variant variant,
                 const WeakestBounds& weakest )
{
   VariantOutcome out;
   out.variant = variant;
   PropagationConfig cfg = base;
   cfg.variant = variant;
   try
   {
      auto run = measure_run( inst, cfg, weakest );
      out.status = run.status == RunStatus::kNoChanges ? OutcomeStatus::kNoChanges
                                                       : OutcomeStatus::kMeasured;
      out.run = std::move( run );
   }
   catch( const InfeasibleRunError& e )
   {
      out.status = OutcomeStatus::kInfeasible;
      out.infeasible_trace = e.trace();
      out.message = "propagation proves infeasibility";
   }
   catch( const std::exception& e )
   {
      out.status = OutcomeStatus::kFailed;
      out.message = e.what();
   }
   return out;
}

/// Loads every instance and measures each requested variant on it.
inline std::vector<InstanceRecord>
measure_all( const ExperimentConfig& cfg, const std::vector<Variant>& variants )
{
   std::vector<InstanceRecord> records( cfg.instances.size() );
   const auto ids = instance_ids( cfg.instances );
   parallel_for( cfg.instances.size(), cfg.workers, [&]( std::size_t k ) {
      auto loaded = load_instance( cfg.instances[k] );
      InstanceRecord& rec = records[k];
      rec.id = ids[k];
      rec.path = loaded.path;
      rec.warnings = std::move( loaded.warnings );
      rec.load_error = loaded.error;
      if( !loaded.instance )
         return;
      rec.instance = std::move( loaded.instance );
      rec.weakest = compute_weakest_bounds( *rec.instance, cfg.weakest );
      for( Variant v : variants )
         rec.outcomes.push_back( measure_variant( *rec.instance, cfg.propagation, v, *rec.weakest ) );
   } );
   std::stable_sort( records.begin(), records.end(),
                     []( const InstanceRecord& a, const InstanceRecord& b ) {
                        return a.id != b.id ? a.id < b.id : a.path < b.path;
                     } );
   return records;
}

inline int
exit_code_for( const std::vector<InstanceRecord>& records )
{
   const auto failed = static_cast<std::size_t>( std::count_if(
       records.begin(), records.end(), []( const InstanceRecord& r ) { return r.failed(); } ) );
   if( failed == 0 )
      return kExitSuccess;
   return failed == records.size() ? kExitTotalFailure : kExitPartialFailure;
}

// ---------------------------------------------------------------------------
// CSV writers

inline void
write_progress_csv( std::ostream& out, const std::string& id, const MeasuredRun& run )
{
   CsvWriter csv( out );
   for( const char* h :
        { "instance", "variant", "round", "time_ns", "n_current", "p_inf", "p_fin_raw", "p_fin_norm" } )
      csv.field( h );
   csv.end_row();
   for( const auto& s : run.snapshots )
   {
      csv.field( id )
          .field( to_string( run.variant ) )
          .field( s.round )
          .field( s.time_ns )
          .field( s.n_current )
          .field( s.p_inf )
          .field( s.p_fin_raw )
          .field( s.p_fin_normalized );
      csv.end_row();
   }
}

inline void
write_trace_csv( std::ostream& out, const PropagationTrace& trace )
{
   CsvWriter csv( out );
   for( const char* h : { "round", "changes", "inf_reductions", "duration_ns" } )
      csv.field( h );
   csv.end_row();
   for( const auto& r : trace.rounds )
   {
      csv.field( r.round ).field( r.num_changes ).field( r.num_inf_reductions ).field( r.duration_ns );
      csv.end_row();
   }
}

inline void
write_curves_csv( std::ostream& out, const MeasuredRun& run )
{
   CsvWriter csv( out );
   for( const char* h : { "phase", "round", "time_ns", "t", "progress" } )
      csv.field( h );
   csv.end_row();
   auto emit = [&]( const char* phase, const std::optional<ProgressCurve>& curve ) {
      if( !curve )
         return;
      for( const auto& s : curve->samples )
      {
         csv.field( phase ).field( s.round ).field( s.time_ns ).field( s.t ).field( s.progress );
         csv.end_row();
      }
   };
   emit( "finite", run.finite_curve );
   emit( "infinite", run.infinite_curve );
}

inline void
write_weakest_csv( std::ostream& out, const ProblemInstance& inst, const WeakestBounds& wb )
{
   CsvWriter csv( out );
   csv.field( "variable" ).field( "lower" ).field( "upper" );
   csv.end_row();
   for( std::size_t j = 0; j < wb.size(); ++j )
   {
      csv.field( inst.var_name( j ) ).field( wb.lower[j].to_double() ).field( wb.upper[j].to_double() );
      csv.end_row();
   }
}

inline void
write_summary_csv( std::ostream& out, const std::vector<InstanceRecord>& records )
{
   CsvWriter csv( out );
   for( const char* h : { "instance", "variant", "status", "rounds", "fixpoint", "n_total",
                          "max_score", "weakest_cap_hit", "message" } )
      csv.field( h );
   csv.end_row();
   for( const auto& rec : records )
   {
      if( !rec.load_error.empty() )
      {
         csv.field( rec.id ).empty().field( "load_failed" ).empty().empty().empty().empty().empty()
             .field( rec.load_error );
         csv.end_row();
         continue;
      }
      for( const auto& o : rec.outcomes )
      {
         csv.field( rec.id ).field( to_string( o.variant ) ).field( to_string( o.status ) );
         if( o.run )
            csv.field( o.run->trace.total_rounds() )
                .field( o.run->trace.fixpoint_reached )
                .field( o.run->reference.n_total )
                .field( o.run->reference.max_score );
         else if( o.infeasible_trace )
            csv.field( o.infeasible_trace->total_rounds() ).field( false ).empty().empty();
         else
            csv.empty().empty().empty().empty();
         csv.field( rec.weakest && rec.weakest->cap_hit );
         std::string message = o.message;
         if( o.run && !o.run->reference.diagnostics.empty() )
            message += std::to_string( o.run->reference.diagnostics.size() ) +
                       " bound(s) excluded from finite score";
         csv.field( message );
         csv.end_row();
      }
   }
}

inline std::string
grid_to_string( const std::vector<double>& v )
{
   std::string s;
   for( std::size_t i = 0; i < v.size(); ++i )
      s += ( i ? "," : "" ) + format_double( v[i] );
   return s;
}

inline void
write_manifest( const std::filesystem::path& dir, const std::string& command,
                const ExperimentConfig& cfg )
{
   std::ofstream out( dir / "manifest.txt" );
   out << "command=" << command << '\n';
   out << "instances=" << cfg.instances.size() << '\n';
   for( std::size_t i = 0; i < cfg.instances.size(); ++i )
      out << "instance." << i << '=' << cfg.instances[i].string() << '\n';
   out << "variants=";
   for( std::size_t i = 0; i < cfg.variants.size(); ++i )
      out << ( i ? "," : "" ) << to_string( cfg.variants[i] );
   out << '\n';
   out << "max_rounds=" << cfg.propagation.max_rounds << '\n';
   out << "stop=" << ( cfg.propagation.stop_mode == StopMode::kFixpoint ? "fixpoint" : "tolerance" )
       << '\n';
   out << "tau=" << format_double( cfg.propagation.significance_rel_tol ) << '\n';
   out << "accept_abs_tol=" << format_double( cfg.propagation.accept_abs_tol ) << '\n';
   out << "integrality_eps=" << format_double( cfg.propagation.integrality_eps ) << '\n';
   out << "weakest_max_iterations=" << cfg.weakest.max_iterations << '\n';
   out << "progress_grid=" << grid_to_string( cfg.progress_grid ) << '\n';
   std::vector<double> ps, qs;
   for( const auto& g : cfg.stall_grid )
   {
      ps.push_back( g.p );
      qs.push_back( g.q );
   }
   out << "stall_p=" << grid_to_string( ps ) << '\n';
   out << "stall_q=" << grid_to_string( qs ) << '\n';
   out << "baseline=" << to_string( cfg.baseline ) << '\n';
   out << "candidate=" << to_string( cfg.candidate ) << '\n';
   out << "workers=" << cfg.workers << '\n';
   out << "inf_threshold=" << format_double( kInfThreshold ) << '\n';
}

namespace detail
{

inline std::ofstream
open_out( const std::filesystem::path& dir, const std::string& name )
{
   std::ofstream out( dir / name );
   if( !out )
      throw std::runtime_error( "cannot write " + ( dir / name ).string() );
   return out;
}

inline void
prepare_out_dir( const std::filesystem::path& dir )
{
   if( dir.empty() )
      return;
   std::error_code ec;
   std::filesystem::create_directories( dir, ec );
   if( ec )
      throw ConfigError( "cannot create output directory " + dir.string() + ": " + ec.message() );
}

} // namespace detail

// ---------------------------------------------------------------------------
// Commands

struct RunReport
{
   std::vector<InstanceRecord> records;
   int exit_code = kExitSuccess;
};

/// `run`: measure every (instance, variant) and write progress, trace and
/// curve CSVs plus summary.csv.
inline RunReport
cmd_run( const ExperimentConfig& cfg )
{
   cfg.validate();
   detail::prepare_out_dir( cfg.out_dir );
   RunReport report;
   report.records = measure_all( cfg, cfg.variants );
   report.exit_code = exit_code_for( report.records );
   if( cfg.out_dir.empty() )
      return report;

   for( const auto& rec : report.records )
      for( const auto& o : rec.outcomes )
      {
         if( !o.run )
            continue;
         const std::string stem = rec.id + "." + to_string( o.variant );
         auto progress = detail::open_out( cfg.out_dir, stem + ".progress.csv" );
         write_progress_csv( progress, rec.id, *o.run );
         auto trace = detail::open_out( cfg.out_dir, stem + ".trace.csv" );
         write_trace_csv( trace, o.run->trace );
         auto curves = detail::open_out( cfg.out_dir, stem + ".curves.csv" );
         write_curves_csv( curves, *o.run );
      }
   auto summary = detail::open_out( cfg.out_dir, "summary.csv" );
   write_summary_csv( summary, report.records );
   write_manifest( cfg.out_dir, "run", cfg );
   return report;
}

enum class Phase
{
   kFinite,
   kInfinite
};

inline const char*
to_string( Phase p )
{
   return p == Phase::kFinite ? "finite" : "infinite";
}

struct ComparisonRow
{
   std::string instance;
   Phase phase = Phase::kFinite;
   double progress = 0.0;
   Speedup speedup;
};

struct ComparisonSummary
{
   Phase phase = Phase::kFinite;
   double progress = 0.0;
   std::size_t included = 0;
   std::optional<double> geometric_mean;
};

struct CompareReport
{
   std::vector<InstanceRecord> records;
   std::vector<ComparisonRow> rows;
   std::vector<ComparisonSummary> summary;
   /// Instances left out entirely, with the reason.
   std::vector<std::pair<std::string, std::string>> excluded;
   int exit_code = kExitSuccess;
};

/// Speedup table from already measured records.
inline CompareReport
compare_records( std::vector<InstanceRecord> records, const ExperimentConfig& cfg )
{
   CompareReport report;
   std::map<std::pair<int, double>, std::vector<double>> ratios;

   for( const auto& rec : records )
   {
      const VariantOutcome* b = rec.outcome( cfg.baseline );
      const VariantOutcome* c = rec.outcome( cfg.candidate );
      if( !b || !c || !b->run || !c->run || b->status != OutcomeStatus::kMeasured ||
          c->status != OutcomeStatus::kMeasured )
      {
         report.excluded.emplace_back( rec.id, "not measured by both variants" );
         continue;
      }
      if( !fixpoints_agree( b->run->reference.limit, c->run->reference.limit, cfg.verify_rel_tol ) )
      {
         report.excluded.emplace_back( rec.id, "fixed points disagree" );
         continue;
      }
      for( Phase phase : { Phase::kFinite, Phase::kInfinite } )
      {
         const auto& cb = phase == Phase::kFinite ? b->run->finite_curve : b->run->infinite_curve;
         const auto& cc = phase == Phase::kFinite ? c->run->finite_curve : c->run->infinite_curve;
         if( !cb || !cc )
            continue;
         for( double x : cfg.progress_grid )
         {
            auto s = speedup_at_progress( *cb, *cc, x );
            if( !s )
               continue;
            report.rows.push_back( ComparisonRow{ rec.id, phase, x, *s } );
            ratios[{ static_cast<int>( phase ), x }].push_back( s->ratio );
         }
      }
   }

   for( Phase phase : { Phase::kFinite, Phase::kInfinite } )
      for( double x : cfg.progress_grid )
      {
         ComparisonSummary s;
         s.phase = phase;
         s.progress = x;
         auto it = ratios.find( { static_cast<int>( phase ), x } );
         if( it != ratios.end() )
         {
            s.included = it->second.size();
            s.geometric_mean = geometric_mean( it->second );
         }
         report.summary.push_back( s );
      }
   report.exit_code = exit_code_for( records );
   report.records = std::move( records );
   return report;
}

inline void
write_compare_csv( std::ostream& out, const CompareReport& report )
{
   CsvWriter csv( out );
   for( const char* h : { "instance", "phase", "progress", "t_baseline_ns", "t_candidate_ns",
                          "speedup", "floored", "included" } )
      csv.field( h );
   csv.end_row();
   for( const auto& r : report.rows )
   {
      csv.field( r.instance )
          .field( to_string( r.phase ) )
          .field( r.progress )
          .field( r.speedup.baseline_ns )
          .field( r.speedup.candidate_ns )
          .field( r.speedup.ratio )
          .field( r.speedup.floored )
          .empty();
      csv.end_row();
   }
   for( const auto& s : report.summary )
   {
      csv.field( "geomean" )
          .field( to_string( s.phase ) )
          .field( s.progress )
          .empty()
          .empty()
          .field( s.geometric_mean )
          .empty()
          .field( s.included );
      csv.end_row();
   }
}

/// `compare`: measure baseline and candidate on every instance and report
/// speedups t(baseline) / t(candidate) per progress level and phase, with
/// geometric means. A variant compared with itself reuses one measurement.
inline CompareReport
cmd_compare( const ExperimentConfig& cfg )
{
   cfg.validate();
   detail::prepare_out_dir( cfg.out_dir );
   std::vector<Variant> variants{ cfg.baseline };
   if( cfg.candidate != cfg.baseline )
      variants.push_back( cfg.candidate );
   auto report = compare_records( measure_all( cfg, variants ), cfg );
   if( !cfg.out_dir.empty() )
   {
      auto out = detail::open_out( cfg.out_dir, "compare.csv" );
      write_compare_csv( out, report );
      write_manifest( cfg.out_dir, "compare", cfg );
   }
   return report;
}

enum class VerifyStatus
{
   kAgree,
   kInfeasibleBoth,
   kDisagree,
   kError
};

inline const char*
to_string( VerifyStatus s )
{
   switch( s )
   {
   case VerifyStatus::kAgree:
      return "agree";
   case VerifyStatus::kInfeasibleBoth:
      return "infeasible_both";
   case VerifyStatus::kDisagree:
      return "disagree";
   default:
      return "error";
   }
}

inline VerifyStatus
verify_states( const BoundsState& a, const BoundsState& b, double rel_tol )
{
   if( !fixpoints_agree( a, b, rel_tol ) )
      return VerifyStatus::kDisagree;
   return a.infeasible ? VerifyStatus::kInfeasibleBoth : VerifyStatus::kAgree;
}

struct VerifyRecord
{
   std::string id;
   VerifyStatus status = VerifyStatus::kError;
   std::string message;
};

struct VerifyReport
{
   std::vector<VerifyRecord> records;
   int exit_code = kExitSuccess;

   std::vector<std::string>
   disagreeing() const
   {
      std::vector<std::string> ids;
      for( const auto& r : records )
         if( r.status == VerifyStatus::kDisagree )
            ids.push_back( r.id );
      return ids;
   }
};

/// `verify`: propagate every instance to its fixed point with each variant and
/// check that all variants agree with the first one.
inline VerifyReport
cmd_verify( const ExperimentConfig& cfg )
{
   cfg.validate();
   if( cfg.variants.size() < 2 )
      throw ConfigError( "verify needs at least two variants" );
   detail::prepare_out_dir( cfg.out_dir );

   VerifyReport report;
   report.records.resize( cfg.instances.size() );
   const auto ids = instance_ids( cfg.instances );
   parallel_for( cfg.instances.size(), cfg.workers, [&]( std::size_t k ) {
      auto loaded = load_instance( cfg.instances[k] );
      VerifyRecord& rec = report.records[k];
      rec.id = ids[k];
      if( !loaded.instance )
      {
         rec.message = loaded.error;
         return;
      }
      try
      {
         std::vector<BoundsState> finals;
         for( Variant v : cfg.variants )
         {
            PropagationConfig pc = cfg.propagation;
            pc.variant = v;
            pc.stop_mode = StopMode::kFixpoint;
            auto res = propagate_to_fixpoint( *loaded.instance, pc );
            if( !res.state.infeasible && !res.trace.fixpoint_reached )
               rec.message = std::string( to_string( v ) ) + " hit the round limit";
            finals.push_back( std::move( res.state ) );
         }
         rec.status = VerifyStatus::kAgree;
         for( std::size_t i = 1; i < finals.size(); ++i )
         {
            auto s = verify_states( finals[0], finals[i], cfg.verify_rel_tol );
            if( s == VerifyStatus::kDisagree )
            {
               rec.status = s;
               break;
            }
            rec.status = s;
         }
      }
      catch( const std::exception& e )
      {
         rec.status = VerifyStatus::kError;
         rec.message = e.what();
      }
   } );
   std::stable_sort( report.records.begin(), report.records.end(),
                     []( const VerifyRecord& a, const VerifyRecord& b ) { return a.id < b.id; } );

   const auto errors = static_cast<std::size_t>(
       std::count_if( report.records.begin(), report.records.end(),
                      []( const VerifyRecord& r ) { return r.status == VerifyStatus::kError; } ) );
   report.exit_code = errors == 0                       ? kExitSuccess
                      : errors == report.records.size() ? kExitTotalFailure
                                                        : kExitPartialFailure;

   if( !cfg.out_dir.empty() )
   {
      auto out = detail::open_out( cfg.out_dir, "verify.csv" );
      CsvWriter csv( out );
      csv.field( "instance" ).field( "status" ).field( "message" );
      csv.end_row();
      for( const auto& r : report.records )
      {
         csv.field( r.id ).field( to_string( r.status ) ).field( r.message );
         csv.end_row();
      }
      write_manifest( cfg.out_dir, "verify", cfg );
   }
   return report;
}

struct StallReportRow
{
   StallParams params;
   std::optional<std::size_t> stalls_immediate;
   std::optional<std::size_t> stalls_deferred;
};

struct StallSweepReport
{
   std::vector<InstanceRecord> records;
   std::vector<StallReportRow> rows;
   /// Runs per variant that entered the sweep.
   std::size_t eligible_immediate = 0;
   std::size_t eligible_deferred = 0;
   int exit_code = kExitSuccess;
};

/// Sweep from already measured records. Runs without bound changes and runs
/// with only infinite reductions (no finite curve) are not eligible.
inline StallSweepReport
stall_records( std::vector<InstanceRecord> records, const ExperimentConfig& cfg )
{
   StallSweepReport report;
   auto sweep_for = [&]( Variant v, std::size_t& eligible ) -> std::optional<std::vector<std::size_t>> {
      if( std::find( cfg.variants.begin(), cfg.variants.end(), v ) == cfg.variants.end() )
         return std::nullopt;
      std::vector<StallInput> inputs;
      for( const auto& rec : records )
      {
         const VariantOutcome* o = rec.outcome( v );
         if( !o || o->status != OutcomeStatus::kMeasured || !o->run->finite_curve )
            continue;
         inputs.push_back(
             StallInput{ &*o->run->finite_curve, RoundInfiniteReductions::from_trace( o->run->trace ) } );
      }
      eligible = inputs.size();
      return stall_sweep( inputs, cfg.stall_grid );
   };
   auto imm = sweep_for( Variant::kImmediate, report.eligible_immediate );
   auto def = sweep_for( Variant::kDeferred, report.eligible_deferred );
   for( std::size_t g = 0; g < cfg.stall_grid.size(); ++g )
   {
      StallReportRow row;
      row.params = cfg.stall_grid[g];
      if( imm )
         row.stalls_immediate = ( *imm )[g];
      if( def )
         row.stalls_deferred = ( *def )[g];
      report.rows.push_back( row );
   }
   report.exit_code = exit_code_for( records );
   report.records = std::move( records );
   return report;
}

inline void
write_stall_csv( std::ostream& out, const StallSweepReport& report )
{
   CsvWriter csv( out );
   csv.field( "p" ).field( "q" ).field( "stalls_immediate" ).field( "stalls_deferred" );
   csv.end_row();
   for( const auto& r : report.rows )
   {
      csv.field( r.params.p ).field( r.params.q ).field( r.stalls_immediate ).field( r.stalls_deferred );
      csv.end_row();
   }
}

/// `stall`: measure every instance and count premature stalls per (p, q).
inline StallSweepReport
cmd_stall( const ExperimentConfig& cfg )
{
   cfg.validate();
   detail::prepare_out_dir( cfg.out_dir );
   auto report = stall_records( measure_all( cfg, cfg.variants ), cfg );
   if( !cfg.out_dir.empty() )
   {
      auto out = detail::open_out( cfg.out_dir, "stall.csv" );
      write_stall_csv( out, report );
      write_manifest( cfg.out_dir, "stall", cfg );
   }
   return report;
}

struct WeakestRecord
{
   std::string id;
   std::optional<ProblemInstance> instance;
   std::optional<WeakestBounds> weakest;
   std::string error;
};

struct WeakestReport
{
   std::vector<WeakestRecord> records;
   int exit_code = kExitSuccess;
};

/// `weakest-bounds`: compute weakest bounds per instance; writes
/// <id>.weakest.csv when an output directory is set.
inline WeakestReport
cmd_weakest_bounds( const ExperimentConfig& cfg )
{
   if( cfg.instances.empty() )
      throw ConfigError( "no instances given" );
   detail::prepare_out_dir( cfg.out_dir );
   WeakestReport report;
   report.records.resize( cfg.instances.size() );
   const auto ids = instance_ids( cfg.instances );
   parallel_for( cfg.instances.size(), cfg.workers, [&]( std::size_t k ) {
      auto loaded = load_instance( cfg.instances[k] );
      auto& rec = report.records[k];
      rec.id = ids[k];
      rec.error = loaded.error;
      if( !loaded.instance )
         return;
      rec.weakest = compute_weakest_bounds( *loaded.instance, cfg.weakest );
      rec.instance = std::move( loaded.instance );
   } );
   std::stable_sort( report.records.begin(), report.records.end(),
                     []( const WeakestRecord& a, const WeakestRecord& b ) { return a.id < b.id; } );
   const auto failed = static_cast<std::size_t>(
       std::count_if( report.records.begin(), report.records.end(),
                      []( const WeakestRecord& r ) { return !r.weakest; } ) );
   report.exit_code = failed == 0                       ? kExitSuccess
                      : failed == report.records.size() ? kExitTotalFailure
                                                        : kExitPartialFailure;
   if( !cfg.out_dir.empty() )
      for( const auto& rec : report.records )
         if( rec.weakest )
         {
            auto out = detail::open_out( cfg.out_dir, rec.id + ".weakest.csv" );
            write_weakest_csv( out, *rec.instance, *rec.weakest );
         }
   return report;
}

} // namespace propmeter
