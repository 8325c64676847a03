#include <gtest/gtest.h>

#include <string>

#include "propmeter/mps.hpp"
#include "support/fixtures.hpp"

using namespace propmeter;

namespace
{

MpsError::Kind
error_kind( const std::string& text, std::size_t* line = nullptr )
{
   try
   {
      parse_mps( text );
   }
   catch( const MpsError& e )
   {
      if( line )
         *line = e.line();
      return e.kind();
   }
   ADD_FAILURE() << "expected an MPS error";
   return MpsError::Kind::kBadNumber;
}

std::string
single_row( const std::string& sense, const std::string& rhs, const std::string& range,
            const std::string& bounds = "" )
{
   std::string s = "NAME T\nROWS\n N obj\n " + sense + " r\nCOLUMNS\n    x obj 1 r 1\n";
   s += "RHS\n    rhs r " + rhs + "\n";
   if( !range.empty() )
      s += "RANGES\n    rng r " + range + "\n";
   s += "BOUNDS\n" + ( bounds.empty() ? std::string( " UP bnd x 100\n" ) : bounds );
   s += "ENDATA\n";
   return s;
}

} // namespace

TEST( MpsTest, Fix1FileEqualsFixture )
{
   const auto res = parse_mps( support::read_file( support::fixture_path( "fix1.mps" ) ) );
   EXPECT_EQ( res.instance, support::fix1() );
   EXPECT_EQ( res.name, "FIX1" );
   EXPECT_EQ( res.instance.var_name( 0 ), "X1" );
   // the objective row and its coefficient are counted
   EXPECT_EQ( res.diagnostics.rows_read, 2u );
   EXPECT_EQ( res.diagnostics.columns_read, 2u );
   EXPECT_EQ( res.diagnostics.entries_read, 3u );
}

TEST( MpsTest, RowSenses )
{
   const auto l = parse_mps( single_row( "L", "4", "" ) ).instance.constraint( 0 );
   EXPECT_TRUE( l.lhs.is_neg_inf() );
   EXPECT_EQ( l.rhs.value(), 4.0 );
   const auto g = parse_mps( single_row( "G", "4", "" ) ).instance.constraint( 0 );
   EXPECT_EQ( g.lhs.value(), 4.0 );
   EXPECT_TRUE( g.rhs.is_pos_inf() );
   const auto e = parse_mps( single_row( "E", "4", "" ) ).instance.constraint( 0 );
   EXPECT_EQ( e.lhs.value(), 4.0 );
   EXPECT_EQ( e.rhs.value(), 4.0 );
}

TEST( MpsTest, RangesFollowSignRule )
{
   auto sides = []( const std::string& sense, const std::string& r ) {
      const auto c = parse_mps( single_row( sense, "4", r ) ).instance.constraint( 0 );
      return std::make_pair( c.lhs.to_double(), c.rhs.to_double() );
   };
   EXPECT_EQ( sides( "E", "2" ), std::make_pair( 4.0, 6.0 ) );
   EXPECT_EQ( sides( "E", "-2" ), std::make_pair( 2.0, 4.0 ) );
   EXPECT_EQ( sides( "L", "2" ), std::make_pair( 2.0, 4.0 ) );
   EXPECT_EQ( sides( "L", "-2" ), std::make_pair( 2.0, 4.0 ) );
   EXPECT_EQ( sides( "G", "2" ), std::make_pair( 4.0, 6.0 ) );
   EXPECT_EQ( sides( "G", "-2" ), std::make_pair( 4.0, 6.0 ) );
}

TEST( MpsTest, BoundTypes )
{
   auto dom = []( const std::string& bounds ) {
      return parse_mps( single_row( "L", "4", "", bounds ) ).instance.domain( 0 );
   };
   EXPECT_TRUE( dom( " MI bnd x\n" ).lower.is_neg_inf() );
   EXPECT_TRUE( dom( " MI bnd x\n" ).upper.is_pos_inf() );
   const auto fr = dom( " FR bnd x\n" );
   EXPECT_TRUE( fr.lower.is_neg_inf() && fr.upper.is_pos_inf() );
   const auto fx = dom( " FX bnd x 2.5\n" );
   EXPECT_EQ( fx.lower.value(), 2.5 );
   EXPECT_EQ( fx.upper.value(), 2.5 );
   const auto lo = dom( " LO bnd x -3\n" );
   EXPECT_EQ( lo.lower.value(), -3.0 );
   EXPECT_TRUE( lo.upper.is_pos_inf() );
   const auto pl = dom( " PL bnd x\n" );
   EXPECT_EQ( pl.lower.value(), 0.0 );
   EXPECT_TRUE( pl.upper.is_pos_inf() );
   const auto bv = dom( " BV bnd x\n" );
   EXPECT_TRUE( bv.is_integer );
   EXPECT_EQ( bv.upper.value(), 1.0 );
   const auto li = dom( " LI bnd x 2\n UI bnd x 9\n" );
   EXPECT_TRUE( li.is_integer );
   EXPECT_EQ( li.lower.value(), 2.0 );
   EXPECT_EQ( li.upper.value(), 9.0 );
   EXPECT_TRUE( dom( " UP bnd x 1e30\n" ).upper.is_pos_inf() );
}

TEST( MpsTest, BinaryOverrideWarns )
{
   const auto res = parse_mps( single_row( "L", "4", "", " UP bnd x 7\n BV bnd x\n" ) );
   EXPECT_EQ( res.instance.domain( 0 ).upper.value(), 1.0 );
   EXPECT_FALSE( res.diagnostics.warnings.empty() );
}

TEST( MpsTest, NegativeUpperBoundWithDefaultLowerWarns )
{
   const auto res = parse_mps( single_row( "L", "4", "", " UP bnd x -2\n" ) );
   EXPECT_TRUE( res.instance.domain( 0 ).lower.is_neg_inf() );
   EXPECT_EQ( res.instance.domain( 0 ).upper.value(), -2.0 );
   EXPECT_FALSE( res.diagnostics.warnings.empty() );
}

TEST( MpsTest, IntegerMarkersAndMissingUpperBoundDiagnostic )
{
   const std::string text = "NAME T\nROWS\n N obj\n L r\nCOLUMNS\n"
                            "    M1 'MARKER' 'INTORG'\n"
                            "    y r 1\n"
                            "    M2 'MARKER' 'INTEND'\n"
                            "    z r 1\n"
                            "RHS\n    rhs r 4\nENDATA\n";
   const auto res = parse_mps( text );
   EXPECT_TRUE( res.instance.domain( 0 ).is_integer );
   EXPECT_FALSE( res.instance.domain( 1 ).is_integer );
   EXPECT_EQ( res.instance.domain( 0 ).lower.value(), 0.0 );
   EXPECT_TRUE( res.instance.domain( 0 ).upper.is_pos_inf() );
   bool found = false;
   for( const auto& w : res.diagnostics.warnings )
      found = found || w.message.find( "y" ) != std::string::npos;
   EXPECT_TRUE( found );
}

TEST( MpsTest, ZeroCoefficientIsDroppedWithWarning )
{
   const std::string text = "NAME T\nROWS\n N obj\n L r\nCOLUMNS\n    x r 0 obj 1\n    y r 2\n"
                            "RHS\n    rhs r 4\nENDATA\n";
   const auto res = parse_mps( text );
   ASSERT_EQ( res.instance.constraint( 0 ).terms.size(), 1u );
   EXPECT_EQ( res.instance.constraint( 0 ).terms[0].var, 1u );
   ASSERT_FALSE( res.diagnostics.warnings.empty() );
   EXPECT_EQ( res.diagnostics.warnings[0].line, 6u );
}

TEST( MpsTest, SkippedSectionsWarn )
{
   const std::string text = "NAME T\nOBJSENSE\n    MAX\nROWS\n N obj\n L r\nCOLUMNS\n    x r 1\n"
                            "RHS\n    rhs r 4\nSOS\n S1 SOS s1 1\n    s1 x 1\nENDATA\n";
   const auto res = parse_mps( text );
   EXPECT_EQ( res.instance.num_vars(), 1u );
   EXPECT_GE( res.diagnostics.warnings.size(), 2u );
}

TEST( MpsTest, ObjectiveRhsIsIgnored )
{
   const std::string text = "NAME T\nROWS\n N obj\n L r\nCOLUMNS\n    x r 1\n"
                            "RHS\n    rhs obj 10 r 4\nENDATA\n";
   const auto res = parse_mps( text );
   EXPECT_EQ( res.instance.constraint( 0 ).rhs.value(), 4.0 );
}

TEST( MpsTest, RhsWithoutSetName )
{
   const std::string text = "NAME T\nROWS\n N obj\n L r\nCOLUMNS\n    x r 1\nRHS\n    r 4\nENDATA\n";
   EXPECT_EQ( parse_mps( text ).instance.constraint( 0 ).rhs.value(), 4.0 );
}

TEST( MpsTest, DistinctErrors )
{
   std::size_t line = 0;
   EXPECT_EQ( error_kind( "NAME T\nFOO\nENDATA\n", &line ), MpsError::Kind::kMalformedSection );
   EXPECT_EQ( line, 2u );
   EXPECT_EQ( error_kind( "NAME T\nROWS\n L r\n L r\nENDATA\n", &line ), MpsError::Kind::kDuplicateRow );
   EXPECT_EQ( line, 4u );
   EXPECT_EQ( error_kind( "NAME T\nROWS\n L r\nCOLUMNS\n    x q 1\nENDATA\n", &line ),
              MpsError::Kind::kUnknownRow );
   EXPECT_EQ( line, 5u );
   EXPECT_EQ( error_kind( "NAME T\nROWS\n L r\nCOLUMNS\n    x r 1\nBOUNDS\n UP b y 3\nENDATA\n", &line ),
              MpsError::Kind::kUnknownColumn );
   EXPECT_EQ( line, 7u );
   EXPECT_EQ( error_kind( "NAME T\nROWS\n L r\nCOLUMNS\n    x r abc\nENDATA\n" ), MpsError::Kind::kBadNumber );
   EXPECT_EQ( error_kind( "NAME T\nROWS\n L r\nCOLUMNS\n    x r 1\n    x r 2\nENDATA\n" ),
              MpsError::Kind::kDuplicateEntry );
   EXPECT_EQ( error_kind( "NAME T\nROWS\n X r\nENDATA\n" ), MpsError::Kind::kMalformedLine );
   EXPECT_EQ( error_kind( "  x r 1\n" ), MpsError::Kind::kMalformedLine );
}

TEST( MpsTest, Deterministic )
{
   const auto text = support::read_file( support::fixture_path( "fix1.mps" ) );
   EXPECT_EQ( parse_mps( text ).instance, parse_mps( text ).instance );
}
