//! Free-text time coverage to [`TimeRange`].
//!
//! Recognized forms, anywhere inside the text:
//!
//! | form | example | result |
//! |---|---|---|
//! | year | `2020` | 2020 – 2020 |
//! | year range | `2007–2018`, `2007 to 2018`, `between 2007 and 2018` | 2007 – 2018 |
//! | short end year | `2013–16` | 2013 – 2016 |
//! | month year | `March 2013`, `Sept. 2019`, `17 June 2018`, `June 17, 2018` | 2013-03 |
//! | month range sharing a year | `Mar–Jun 2019` | 2019-03 – 2019-06 |
//! | numeric month | `2013-03`, `03/2013`, `2018-06-17` | 2013-03 |
//! | decade | `2010s` | 2010 – 2019 |
//! | list | `2010, 2012 and 2015` | 2010 – 2015 |
//! | open end | `since 2015`, `2015 onwards`, `2015–present`, `ongoing` | 2015 – open |
//!
//! Years outside 1700..=2100 are ignored. The range runs from the earliest
//! to the latest point found. Text with no point is kept as `unparsed`.
//! A hyphen between a year and two digits up to 12 reads as a month
//! (`2011-12` is December 2011); an en dash or a value above 12 reads as a
//! short end year.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const MIN_YEAR: i32 = 1700;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub month: Option<u8>,
}

impl YearMonth {
    pub fn year(year: i32) -> Self {
        YearMonth { year, month: None }
    }

    pub fn ym(year: i32, month: u8) -> Self {
        YearMonth { year, month: Some(month) }
    }

    fn start_key(self) -> (i32, u8) {
        (self.year, self.month.unwrap_or(0))
    }

    fn end_key(self) -> (i32, u8) {
        (self.year, self.month.unwrap_or(13))
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.month {
            Some(m) => write!(f, "{:04}-{:02}", self.year, m),
            None => write!(f, "{:04}", self.year),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: Option<YearMonth>,
    /// `None` for open-ended ranges.
    pub end: Option<YearMonth>,
    pub open_ended: bool,
    /// Original text when nothing could be parsed.
    pub unparsed: Option<String>,
}

impl TimeRange {
    pub fn unparsed(raw: &str) -> Self {
        TimeRange { start: None, end: None, open_ended: false, unparsed: Some(raw.to_string()) }
    }

    pub fn is_parsed(&self) -> bool {
        self.start.is_some()
    }

    /// Last covered year; open ranges reach `now_year`.
    pub fn end_year_or(&self, now_year: i32) -> Option<i32> {
        match (self.start, self.end) {
            (Some(_), Some(e)) => Some(e.year),
            (Some(s), None) => Some(now_year.max(s.year)),
            _ => None,
        }
    }

    /// Does the range overlap the closed year interval `[from, to]`?
    /// Unparsed ranges never overlap.
    pub fn overlaps_years(&self, from: Option<i32>, to: Option<i32>) -> bool {
        let Some(start) = self.start else { return false };
        let end = self.end.map(|e| e.year).unwrap_or(i32::MAX);
        from.is_none_or(|f| end >= f) && to.is_none_or(|t| start.year <= t)
    }

    /// Midpoint year of the collection period. Open ranges use their start.
    pub fn midpoint(&self) -> Option<f64> {
        let s = self.start?;
        let e = self.end.unwrap_or(s);
        Some((s.year + e.year) as f64 / 2.0)
    }

    /// Years named by the range, for queries and comparison.
    pub fn years(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.start.iter().chain(self.end.iter()).map(|p| p.year).collect();
        v.dedup();
        v
    }
}

impl fmt::Display for TimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.start, self.end) {
            (Some(s), Some(e)) if s == e => write!(f, "{s}"),
            (Some(s), Some(e)) => write!(f, "{s} to {e}"),
            (Some(s), None) => write!(f, "{s} to present"),
            _ => f.write_str(self.unparsed.as_deref().unwrap_or("")),
        }
    }
}

const MONTH: &str = r"(jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|sep(?:t(?:ember)?)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)\.?";
const DASH: &str = r"(?:-|–|—|‒|−)";

fn month_number(name: &str) -> u8 {
    match &name[..3] {
        "jan" => 1,
        "feb" => 2,
        "mar" => 3,
        "apr" => 4,
        "may" => 5,
        "jun" => 6,
        "jul" => 7,
        "aug" => 8,
        "sep" => 9,
        "oct" => 10,
        "nov" => 11,
        _ => 12,
    }
}

static ISO_DATE: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(\d{4})-(\d{1,2})-(\d{1,2})\b").unwrap());
static SLASH_DATE: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(\d{1,2})/(\d{1,2})/(\d{4})\b").unwrap());
static SLASH_MONTH: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(\d{1,2})/(\d{4})\b").unwrap());
static YEAR_MONTH: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(\d{4})-(\d{2})\b").unwrap());
static SHORT_RANGE: Lazy<Regex> =
    Lazy::new(|| Regex::new(&format!(r"\b(\d{{4}})\s*(?:{DASH}|/|to)\s*(\d{{2}})\b")).unwrap());
static DECADE: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(\d{3})0'?s\b").unwrap());
static MONTH_PAIR: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(
        r"\b{MONTH}\s*(?:{DASH}|to|through|until|and)\s*{MONTH},?\s+(\d{{4}})\b"
    ))
    .unwrap()
});
static DAY_MONTH_YEAR: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(r"\b\d{{1,2}}(?:st|nd|rd|th)?\s+{MONTH},?\s+(\d{{4}})\b")).unwrap()
});
static MONTH_YEAR: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(r"\b{MONTH}(?:\s+\d{{1,2}}(?:st|nd|rd|th)?)?,?\s+(?:of\s+)?(\d{{4}})\b")).unwrap()
});
static FISCAL: Lazy<Regex> = Lazy::new(|| Regex::new(r"\bfy\s?(\d{4})\b").unwrap());
static YEAR: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(\d{4})\b").unwrap());
static OPEN_END: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"\b(since|onwards?|present|ongoing|to date|to now|until now|today|current)\b").unwrap()
});

fn valid_year(y: i32) -> bool {
    (MIN_YEAR..=MAX_YEAR).contains(&y)
}

fn mask(text: &mut String, range: std::ops::Range<usize>) {
    let blank = " ".repeat(text[range.clone()].len());
    text.replace_range(range, &blank);
}

/// Apply `re` to `text`, turning each match into points and blanking it so
/// later, more general patterns do not see it again.
fn take(
    text: &mut String,
    re: &Regex,
    points: &mut Vec<YearMonth>,
    mut f: impl FnMut(&regex::Captures) -> Option<Vec<YearMonth>>,
) {
    let mut spans = Vec::new();
    for caps in re.captures_iter(text) {
        if let Some(found) = f(&caps) {
            if found.iter().all(|p| valid_year(p.year) && p.month.is_none_or(|m| (1..=12).contains(&m))) {
                points.extend(found);
                spans.push(caps.get(0).unwrap().range());
            }
        }
    }
    for s in spans {
        mask(text, s);
    }
}

fn num<T: std::str::FromStr>(caps: &regex::Captures, i: usize) -> T
where
    T::Err: fmt::Debug,
{
    caps[i].parse().unwrap()
}

/// Parse free-text time coverage. Never fails; text without any date is
/// returned as [`TimeRange::unparsed`].
pub fn normalize_time(raw: &str) -> TimeRange {
    let mut text = raw.to_lowercase();
    let mut points = Vec::new();

    take(&mut text, &ISO_DATE, &mut points, |c| Some(vec![YearMonth::ym(num(c, 1), num(c, 2))]));
    take(&mut text, &SLASH_DATE, &mut points, |c| {
        let (a, b, y): (u8, u8, i32) = (num(c, 1), num(c, 2), num(c, 3));
        let month = match (a > 12, b > 12) {
            (true, false) => Some(b),
            (false, true) => Some(a),
            _ => None,
        };
        Some(vec![YearMonth { year: y, month }])
    });
    take(&mut text, &SLASH_MONTH, &mut points, |c| Some(vec![YearMonth::ym(num(c, 2), num(c, 1))]));
    take(&mut text, &YEAR_MONTH, &mut points, |c| {
        let m: u8 = num(c, 2);
        (1..=12).contains(&m).then(|| vec![YearMonth::ym(num(c, 1), m)])
    });
    take(&mut text, &SHORT_RANGE, &mut points, |c| {
        let start: i32 = num(c, 1);
        let end = start - start % 100 + num::<i32>(c, 2);
        (end > start).then(|| vec![YearMonth::year(start), YearMonth::year(end)])
    });
    take(&mut text, &DECADE, &mut points, |c| {
        let d = num::<i32>(c, 1) * 10;
        Some(vec![YearMonth::year(d), YearMonth::year(d + 9)])
    });
    take(&mut text, &MONTH_PAIR, &mut points, |c| {
        let y: i32 = num(c, 3);
        Some(vec![YearMonth::ym(y, month_number(&c[1])), YearMonth::ym(y, month_number(&c[2]))])
    });
    take(&mut text, &DAY_MONTH_YEAR, &mut points, |c| {
        Some(vec![YearMonth::ym(num(c, 2), month_number(&c[1]))])
    });
    take(&mut text, &MONTH_YEAR, &mut points, |c| {
        Some(vec![YearMonth::ym(num(c, 2), month_number(&c[1]))])
    });
    take(&mut text, &FISCAL, &mut points, |c| Some(vec![YearMonth::year(num(c, 1))]));
    take(&mut text, &YEAR, &mut points, |c| Some(vec![YearMonth::year(num(c, 1))]));

    if points.is_empty() {
        return TimeRange::unparsed(raw);
    }
    let start = *points.iter().min_by_key(|p| p.start_key()).unwrap();
    let end = *points.iter().max_by_key(|p| p.end_key()).unwrap();
    if OPEN_END.is_match(&raw.to_lowercase()) {
        return TimeRange { start: Some(start), end: None, open_ended: true, unparsed: None };
    }
    TimeRange { start: Some(start), end: Some(end), open_ended: false, unparsed: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> (Option<YearMonth>, Option<YearMonth>) {
        let t = normalize_time(s);
        (t.start, t.end)
    }

    #[test]
    fn example_card_period() {
        assert_eq!(
            r("March 2013 to February 2016"),
            (Some(YearMonth::ym(2013, 3)), Some(YearMonth::ym(2016, 2)))
        );
    }

    #[test]
    fn embedded_range() {
        assert_eq!(
            r("pre-intervention period, 2007–2018"),
            (Some(YearMonth::year(2007)), Some(YearMonth::year(2018)))
        );
    }

    #[test]
    fn open_ended_has_no_end() {
        let t = normalize_time("since 2015");
        assert!(t.open_ended);
        assert_eq!(t.start, Some(YearMonth::year(2015)));
        assert_eq!(t.end, None);
        assert!(t.overlaps_years(Some(2090), None));
    }

    #[test]
    fn nothing_to_parse() {
        let t = normalize_time("unknown");
        assert_eq!(t.unparsed.as_deref(), Some("unknown"));
        assert!(!t.is_parsed());
        assert!(!t.overlaps_years(None, None));
    }

    #[test]
    fn midpoint_of_example() {
        assert_eq!(normalize_time("March 2013 to February 2016").midpoint(), Some(2014.5));
    }

    #[test]
    fn may_alone_is_not_a_month() {
        assert_eq!(r("data may cover 2019"), (Some(YearMonth::year(2019)), Some(YearMonth::year(2019))));
    }
}
