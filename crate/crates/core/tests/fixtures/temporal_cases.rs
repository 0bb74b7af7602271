// Shared with the acceptance harness.

pub const CASES: &[(&str, &str)] = &[
    // the period of the smartphone activity card
    ("March 2013 to February 2016", "2013-03 to 2016-02"),
    ("2013-03 to 2016-02", "2013-03 to 2016-02"),
    ("Mar. 2013 - Feb. 2016", "2013-03 to 2016-02"),
    ("from January 2019 through December 2020", "2019-01 to 2020-12"),
    ("2009 to 2016", "2009 to 2016"),
    ("2009-2016", "2009 to 2016"),
    ("2009–2016", "2009 to 2016"),
    ("2009 — 2016", "2009 to 2016"),
    ("between 2003 and 2018", "2003 to 2018"),
    ("2015/16", "2015 to 2016"),
    ("2018-19", "2018 to 2019"),
    ("1990s", "1990 to 1999"),
    ("the 1980's", "1980 to 1989"),
    ("2016", "2016"),
    ("collected in 2019", "2019"),
    ("April 2013", "2013-04"),
    ("15 April 2013", "2013-04"),
    ("April 15, 2013", "2013-04"),
    ("2020-03-15", "2020-03"),
    ("2020-03-15 to 2020-06-30", "2020-03 to 2020-06"),
    ("03/2020 - 09/2021", "2020-03 to 2021-09"),
    ("25/12/2019", "2019-12"),
    ("June to August 2018", "2018-06 to 2018-08"),
    ("Sept-Nov 2017", "2017-09 to 2017-11"),
    ("since 2015", "2015 to present"),
    ("2010 onwards", "2010 to present"),
    ("2012 to present", "2012 to present"),
    ("2017-ongoing", "2017 to present"),
    ("2012 and 2018", "2012 to 2018"),
    ("Census years 2000, 2010 and 2020", "2000 to 2020"),
    ("pre-intervention period, 2007–2018", "2007 to 2018"),
    ("annual, 1975 to 2015", "1975 to 2015"),
    ("FY2019", "2019"),
    ("winter 2021", "2021"),
    ("2011-12", "2011-12"),
];

pub const MALFORMED: &[&str] = &[
    "",
    "   ",
    "N/A",
    "unknown",
    "not reported",
    "various years",
    "recent",
    "19th century",
    "year 20155",
    "0000",
    "9999",
    "??/??/????",
    "Q3",
    "several months",
    "--",
];
