//! The bundled synthetic corpus: twenty short articles with seeded model
//! answers, gold annotations, link fixtures and recorded search results.
//!
//! Everything is generated here and written by `litcat synth`. The copy
//! under `corpus/synthetic/` in the repository must match [`generate`]; a
//! test checks that.
//!
//! What the corpus exercises:
//! * two articles outside urban studies (gate excludes them) and one urban
//!   essay without datasets (extraction comes back empty);
//! * a derived result offered as a dataset (demoted by the original check);
//! * a fabricated dataset whose evidence is nowhere in the text (dropped by
//!   verification);
//! * one gold dataset that the extractor splits into two narrower cards, so
//!   strict recall misses it and expanded recall does not;
//! * dead, live, forbidden and missing links, with search fixtures that can
//!   and cannot replace them.

use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::article::{flatten_for_prompt, parse_article, FormatHint, ParsedArticle};
use crate::evaluation::{Benchmark, BenchmarkDataset, Relevance, SystemResults};
use crate::harmonization::{harmonize, CatalogEntry, Gazetteer, SourceArticle};
use crate::linking::build_link_query;
use crate::providers::reference::{RecordedHit, RecordedSearch, ReferenceJudge, SeededResponse};
use crate::providers::{tasks, SearchHit};
use crate::schema::{canonical_taxonomy, CardField, Confidence, DataCard, EvidenceSpan};
use crate::verification::{localize_card, verify_semantics};

pub const BENCHMARK_NAME: &str = "synthetic-20";
/// Engine id of the relink search fixtures.
pub const FIXTURE_ENGINE: &str = "fixture";

const STAT: &str = "Statistical infrastructure data";
const HUMAN: &str = "Human behavior data";
const POLICY: &str = "Policy and survey data";
const SENSING: &str = "Multimodal sensing data";

const BUILDINGS: &str = "Building footprints and land-use maps";
const POIS: &str = "Points of interest (POIs)";
const MOBILITY: &str = "Human mobility traces (GPS, transit cards, ride-hailing)";
const SOCIOECON: &str = "Socioeconomic activities (consumption, employment, and commerce)";
const SOCIAL: &str = "Social media interactions and online behavior";
const HEALTH: &str = "Health and wellbeing data (hospitalization counts and survey-based measures)";
const CENSUS: &str = "Population censuses and household surveys";
const REPORTS: &str = "Government reports and urban planning documents";
const SATELLITE: &str = "Satellite remote sensing imagery (optical, SAR, night-time lights)";
const GROUND: &str = "Ground-based sensors (air quality, temperature, and noise)";
const IOT: &str = "Urban IoT devices (traffic, energy, water, environmental monitoring)";
const STATIONS: &str = "City-wide camera networks and meteorological stations";

/// What happens to a card's link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkPlan {
    /// No URL and nothing to find.
    None,
    /// Original URL answers 200.
    Alive,
    /// Original URL answers 403; liveness unknown, kept.
    Forbidden,
    /// Original URL answers 404 and search finds nothing usable.
    Dead,
    /// Original URL answers 404 and search finds a replacement.
    DeadRecovered,
    /// No URL; search finds one.
    Recovered,
}

/// How a card relates to the gold annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Gold(Relevance),
    /// Extracted but not annotated: a narrower piece of a gold dataset.
    Split,
    /// A derived result; the original check should demote it.
    Derived,
    /// Evidence absent from the article; verification should drop it.
    Fabricated,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub key: &'static str,
    pub name: &'static str,
    pub summary: &'static str,
    pub category: &'static str,
    pub sub_category: &'static str,
    pub time: Option<&'static str>,
    pub geo: Option<&'static str>,
    pub url: Option<&'static str>,
    pub refs: &'static [&'static str],
    pub evidence: Vec<(CardField, &'static str)>,
    pub role: Role,
    pub link: LinkPlan,
}

#[derive(Debug, Clone)]
pub struct SynthArticle {
    pub paper_id: &'static str,
    pub format: FormatHint,
    pub title: &'static str,
    pub journal: &'static str,
    pub year: i32,
    pub abstract_text: &'static str,
    pub sections: Vec<(&'static str, &'static str)>,
    pub table: Option<(&'static str, &'static [&'static str])>,
    pub urban: bool,
    pub datasets: Vec<SynthDataset>,
    /// Gold annotations with no card of their own.
    pub gold_only: Vec<SynthDataset>,
}

impl SynthArticle {
    pub fn file_name(&self) -> String {
        match self.format {
            FormatHint::Html => format!("{}.html", self.paper_id),
            FormatHint::StructuredText => format!("{}.txt", self.paper_id),
        }
    }

    pub fn source(&self) -> String {
        match self.format {
            FormatHint::Html => self.html(),
            FormatHint::StructuredText => self.structured(),
        }
    }

    fn html(&self) -> String {
        let mut s = String::new();
        s.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n");
        s.push_str(&format!("<title>{}</title>\n", esc(self.title)));
        s.push_str(&format!("<meta name=\"citation_title\" content=\"{}\">\n", esc(self.title)));
        s.push_str(&format!("<meta name=\"citation_journal_title\" content=\"{}\">\n", esc(self.journal)));
        s.push_str(&format!("<meta name=\"citation_publication_date\" content=\"{}/01/15\">\n", self.year));
        s.push_str("</head>\n<body>\n<article>\n");
        s.push_str(&format!("<h1>{}</h1>\n", esc(self.title)));
        s.push_str(&format!("<div class=\"abstract\"><h2>Abstract</h2><p>{}</p></div>\n", esc(self.abstract_text)));
        for (heading, body) in &self.sections {
            s.push_str(&format!("<h2>{}</h2>\n", esc(heading)));
            for para in body.split("\n\n") {
                s.push_str(&format!("<p>{}</p>\n", esc(para.trim())));
            }
        }
        if let Some((caption, rows)) = self.table {
            s.push_str(&format!("<table>\n<caption>{}</caption>\n", esc(caption)));
            for row in rows {
                let cells: String = row.split('|').map(|c| format!("<td>{}</td>", esc(c.trim()))).collect();
                s.push_str(&format!("<tr>{cells}</tr>\n"));
            }
            s.push_str("</table>\n");
        }
        s.push_str("</article>\n</body>\n</html>\n");
        s
    }

    fn structured(&self) -> String {
        let mut s = format!("# {}\njournal: {}\nyear: {}\n## Abstract\n{}\n", self.title, self.journal, self.year, self.abstract_text);
        for (heading, body) in &self.sections {
            s.push_str(&format!("## {heading}\n"));
            for para in body.split("\n\n") {
                s.push_str(para.trim());
                s.push('\n');
            }
        }
        if let Some((caption, rows)) = self.table {
            s.push_str(&format!("[table] {caption}\n"));
            for row in rows {
                s.push_str(row);
                s.push('\n');
            }
            s.push('\n');
        }
        s
    }

    pub fn parsed(&self) -> ParsedArticle {
        parse_article(self.source().as_bytes(), self.format).expect("synthetic articles parse")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl SynthDataset {
    fn new(key: &'static str, name: &'static str, summary: &'static str, category: &'static str, sub: &'static str) -> Self {
        SynthDataset {
            key,
            name,
            summary,
            category,
            sub_category: sub,
            time: None,
            geo: None,
            url: None,
            refs: &[],
            evidence: Vec::new(),
            role: Role::Gold(Relevance::L1),
            link: LinkPlan::None,
        }
    }

    fn time(mut self, t: &'static str) -> Self {
        self.time = Some(t);
        self
    }

    fn geo(mut self, g: &'static str) -> Self {
        self.geo = Some(g);
        self
    }

    fn url(mut self, u: &'static str, link: LinkPlan) -> Self {
        self.url = Some(u);
        self.link = link;
        self
    }

    fn refs(mut self, r: &'static [&'static str]) -> Self {
        self.refs = r;
        self
    }

    fn ev(mut self, field: CardField, quote: &'static str) -> Self {
        self.evidence.push((field, quote));
        self
    }

    fn role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    fn link(mut self, link: LinkPlan) -> Self {
        self.link = link;
        self
    }

    /// The card as the seeded model answer states it.
    pub fn model_record(&self) -> Value {
        let evidence: Vec<Value> = self
            .evidence
            .iter()
            .map(|(f, q)| json!({"field": f.record_name(), "quote": q, "section": "Data", "confidence": "high"}))
            .collect();
        let mut v = json!({
            "dataset_id": self.key,
            "Data_Name": self.name,
            "Data_summary": self.summary,
            "Category": self.category,
            "Sub-category": self.sub_category,
            "Time_Coverage": self.time.unwrap_or("N/A"),
            "Geographic_Coverage": self.geo.unwrap_or("N/A"),
            "URL": self.url.unwrap_or("N/A"),
            "ref": self.refs,
            "evidence": evidence,
        });
        if self.refs.is_empty() {
            v["ref"] = json!([]);
        }
        v
    }

    /// The card as the extractor produces it from [`model_record`](Self::model_record).
    pub fn card(&self) -> DataCard {
        DataCard {
            dataset_id: self.key.to_string(),
            name: self.name.to_string(),
            summary: self.summary.to_string(),
            category: self.category.to_string(),
            sub_category: Some(self.sub_category.to_string()),
            time_coverage_raw: self.time.map(str::to_string),
            geographic_coverage_raw: self.geo.map(str::to_string),
            url: self.url.map(str::to_string),
            references: self.refs.iter().map(|r| r.to_string()).collect(),
            other_information: None,
            evidence: self
                .evidence
                .iter()
                .map(|(f, q)| EvidenceSpan {
                    field: Some(*f),
                    quote: q.to_string(),
                    claimed_location: Some("Data".into()),
                    confidence: Confidence::High,
                })
                .collect(),
        }
    }

    fn annotation(&self) -> DataCard {
        DataCard { evidence: Vec::new(), ..self.card() }
    }
}

use CardField::{Geo, Name, References, References as Refs, Summary, Time, Url};

fn d(key: &'static str, name: &'static str, summary: &'static str, category: &'static str, sub: &'static str) -> SynthDataset {
    SynthDataset::new(key, name, summary, category, sub)
}

/// The twenty articles.
pub fn articles() -> Vec<SynthArticle> {
    let html = FormatHint::Html;
    let txt = FormatHint::StructuredText;
    vec![
        SynthArticle {
            paper_id: "syn01",
            format: html,
            title: "Countrywide natural experiment links built environment to physical activity",
            journal: "Nature",
            year: 2025,
            abstract_text: "We study how the walkability of the built environment shapes daily steps, using relocations between US cities as a natural experiment.",
            sections: vec![
                ("Introduction", "Walkable neighborhoods are thought to encourage physical activity, but causal evidence is scarce because people choose where to live."),
                (
                    "Data",
                    "Physical activity was measured with the Argus smartphone app. Daily step counts were recorded from March 2013 to February 2016 for 5,424 users who moved between cities. The step data cover the USA (city-level, 1,609 cities) and were provided by Azumio under a research agreement.\n\n\
                     Walkability was taken from Walk Score walkability ratings, which give each address a score from 0 to 100 based on distance to amenities. The scores were downloaded for all 1,609 cities in the United States in 2016 from https://www.walkscore.com.",
                ),
                ("Methods", "For each move, coefficients were estimated with a fixed-effects regression model of daily steps on the change in walkability, and the fitted effects were computed per age group."),
                ("Results", "Moving to a more walkable city increased daily steps by about 1,100 on average, with larger effects for women."),
            ],
            table: Some(("Table 1. Moves by walkability change", &["Change | Moves", "More walkable | 2,112", "Less walkable | 2,377", "Similar | 935"])),
            urban: true,
            datasets: vec![
                d("activity", "Argus smartphone step counts", "Daily step counts of smartphone users recorded by the Argus app, including users who moved between cities.", HUMAN, HEALTH)
                    .time("March 2013 to February 2016")
                    .geo("USA (city-level, 1,609 cities)")
                    .refs(&["Azumio Inc. Argus physical activity app data, research agreement."])
                    .ev(Name, "Physical activity was measured with the Argus smartphone app.")
                    .ev(Summary, "Daily step counts were recorded from March 2013 to February 2016 for 5,424 users who moved between cities.")
                    .ev(Time, "recorded from March 2013 to February 2016")
                    .ev(Geo, "The step data cover the USA (city-level, 1,609 cities)")
                    .ev(Refs, "were provided by Azumio under a research agreement"),
                d("walkscore", "Walk Score walkability ratings", "Walkability scores from 0 to 100 for addresses in US cities, based on distance to amenities.", STAT, POIS)
                    .time("2016")
                    .geo("United States")
                    .url("https://www.walkscore.com", LinkPlan::Alive)
                    .ev(Name, "Walkability was taken from Walk Score walkability ratings")
                    .ev(Summary, "which give each address a score from 0 to 100 based on distance to amenities")
                    .ev(Time, "downloaded for all 1,609 cities in the United States in 2016")
                    .ev(Geo, "all 1,609 cities in the United States")
                    .ev(Url, "from https://www.walkscore.com"),
                d("effects", "Walkability effect estimates", "Regression coefficients for the effect of walkability on daily steps, estimated from the fitted model.", HUMAN, HEALTH)
                    .role(Role::Derived)
                    .ev(Summary, "coefficients were estimated with a fixed-effects regression model of daily steps on the change in walkability"),
            ],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn02",
            format: html,
            title: "Taxi trips and urban mobility in New York City",
            journal: "Nature Cities",
            year: 2024,
            abstract_text: "We describe a decade of taxi travel in New York City and how weather alters urban mobility.",
            sections: vec![
                ("Introduction", "Taxi trips are a dense record of how residents move through a city."),
                (
                    "Data",
                    "We use the TLC trip record data released by the New York City Taxi and Limousine Commission. The records list pick-up and drop-off times, locations and fares for yellow and green taxi trips collected from 2009 to 2016 in New York City, and are published at https://www.nyc.gov/site/tlc/about/tlc-trip-record-data.page.\n\n\
                     Hourly weather came from the Central Park weather station observations obtained from NOAA. The station logs temperature and precipitation for New York City; we retrieved observations for 2009 to 2016 from https://www.ncdc.noaa.gov/cdo-web/datasets.",
                ),
                ("Results", "Rain reduced trips in the outer boroughs but increased short trips in Manhattan."),
            ],
            table: None,
            urban: true,
            datasets: vec![
                d("tlc", "TLC trip record data", "Pick-up and drop-off times, locations and fares of yellow and green taxi trips in New York City.", HUMAN, MOBILITY)
                    .time("2009 to 2016")
                    .geo("New York City")
                    .url("https://www.nyc.gov/site/tlc/about/tlc-trip-record-data.page", LinkPlan::Alive)
                    .ev(Name, "We use the TLC trip record data released by the New York City Taxi and Limousine Commission.")
                    .ev(Summary, "The records list pick-up and drop-off times, locations and fares for yellow and green taxi trips")
                    .ev(Time, "collected from 2009 to 2016 in New York City")
                    .ev(Geo, "collected from 2009 to 2016 in New York City")
                    .ev(Url, "published at https://www.nyc.gov/site/tlc/about/tlc-trip-record-data.page"),
                d("noaa", "Central Park weather station observations", "Hourly temperature and precipitation logged by the Central Park weather station.", SENSING, STATIONS)
                    .time("2009 to 2016")
                    .geo("New York City")
                    .url("https://www.ncdc.noaa.gov/cdo-web/datasets", LinkPlan::Alive)
                    .role(Role::Gold(Relevance::L2))
                    .ev(Name, "Hourly weather came from the Central Park weather station observations obtained from NOAA.")
                    .ev(Summary, "The station logs temperature and precipitation for New York City")
                    .ev(Time, "we retrieved observations for 2009 to 2016")
                    .ev(Url, "from https://www.ncdc.noaa.gov/cdo-web/datasets"),
            ],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn03",
            format: html,
            title: "Two phases of bike share growth in New York",
            journal: "Transportation Research Part A",
            year: 2021,
            abstract_text: "We compare bike share trips in New York before and after the 2017 expansion of the station network into new neighborhoods.",
            sections: vec![
                (
                    "Data",
                    "Trip histories for the first phase of the Citi Bike system in New York City were obtained for 2013 to 2016, covering trip start and end stations and durations.\n\n\
                     Trip histories for the expansion phase of the Citi Bike system in New York City were obtained for 2017 to 2019, after stations opened in new neighborhoods.\n\n\
                     Both phases are published as Citi Bike trip histories at https://citibikenyc.com/system-data.",
                ),
                ("Results", "Ridership per station fell slightly after the expansion while total trips rose by 40 percent."),
            ],
            table: None,
            urban: true,
            datasets: vec![
                d("citibike-first", "Citi Bike trip histories, first phase", "Trip start and end stations and durations of the New York City bike share system during its first phase.", HUMAN, MOBILITY)
                    .role(Role::Split)
                    .time("2013 to 2016")
                    .geo("New York City")
                    .url("https://citibikenyc.com/system-data", LinkPlan::Alive)
                    .ev(Name, "Trip histories for the first phase of the Citi Bike system")
                    .ev(Summary, "covering trip start and end stations and durations")
                    .ev(Time, "Trip histories for the first phase of the Citi Bike system in New York City were obtained for 2013 to 2016")
                    .ev(Geo, "Citi Bike system in New York City")
                    .ev(Url, "published as Citi Bike trip histories at https://citibikenyc.com/system-data"),
                d("citibike-expansion", "Citi Bike trip histories, expansion phase", "Trip start and end stations of the New York City bike share system during its expansion phase.", HUMAN, MOBILITY)
                    .role(Role::Split)
                    .time("2017 to 2019")
                    .geo("New York City")
                    .url("https://citibikenyc.com/system-data", LinkPlan::Alive)
                    .ev(Name, "Trip histories for the expansion phase of the Citi Bike system")
                    .ev(Time, "Trip histories for the expansion phase of the Citi Bike system in New York City were obtained for 2017 to 2019")
                    .ev(Geo, "expansion phase of the Citi Bike system in New York City")
                    .ev(Url, "published as Citi Bike trip histories at https://citibikenyc.com/system-data"),
            ],
            gold_only: vec![d(
                "citibike",
                "Citi Bike trip histories",
                "Trip start and end stations and durations of the New York City bike share system, first phase and expansion phase.",
                HUMAN,
                MOBILITY,
            )
            .time("2013 to 2019")
            .geo("New York City")
            .url("https://citibikenyc.com/system-data", LinkPlan::Alive)],
        },
        SynthArticle {
            paper_id: "syn04",
            format: html,
            title: "Night-time lights track urbanization in West and East Africa",
            journal: "Remote Sensing of Environment",
            year: 2022,
            abstract_text: "Satellite night-time lights reveal the growth of urban areas in Nigeria, Kenya and Ghana, which we validate against household surveys.",
            sections: vec![
                (
                    "Data",
                    "We use VIIRS night-time lights composites, monthly cloud-free radiance images acquired by the Suomi NPP satellite. Composites for Nigeria, Kenya and Ghana were downloaded for 2012 to 2020 from https://eogdata.mines.edu/products/vnl/.\n\n\
                     Household electrification comes from the Demographic and Health Surveys, nationally representative household surveys conducted in Nigeria, Kenya and Ghana in 2014. Survey files were obtained from https://dhsprogram.com.",
                ),
                ("Results", "Lit area grew fastest around Lagos and Nairobi, and electrified households matched lit pixels closely."),
            ],
            table: None,
            urban: true,
            datasets: vec![
                d("viirs", "VIIRS night-time lights composites", "Monthly cloud-free radiance images of night-time lights acquired by the Suomi NPP satellite.", SENSING, SATELLITE)
                    .time("2012 to 2020")
                    .geo("Nigeria, Kenya and Ghana")
                    .url("https://eogdata.mines.edu/products/vnl/", LinkPlan::Alive)
                    .ev(Name, "We use VIIRS night-time lights composites")
                    .ev(Summary, "monthly cloud-free radiance images acquired by the Suomi NPP satellite")
                    .ev(Time, "downloaded for 2012 to 2020")
                    .ev(Geo, "Composites for Nigeria, Kenya and Ghana were downloaded")
                    .ev(Url, "from https://eogdata.mines.edu/products/vnl/"),
                d("dhs", "Demographic and Health Surveys", "Nationally representative household surveys including household electrification.", POLICY, CENSUS)
                    .time("2014")
                    .geo("Nigeria, Kenya and Ghana")
                    .url("https://dhsprogram.com", LinkPlan::Alive)
                    .role(Role::Gold(Relevance::L2))
                    .ev(Name, "Household electrification comes from the Demographic and Health Surveys")
                    .ev(Summary, "nationally representative household surveys conducted in Nigeria, Kenya and Ghana in 2014")
                    .ev(Time, "conducted in Nigeria, Kenya and Ghana in 2014")
                    .ev(Geo, "conducted in Nigeria, Kenya and Ghana")
                    .ev(Url, "Survey files were obtained from https://dhsprogram.com"),
            ],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn05",
            format: html,
            title: "Street view perception of safety across cities",
            journal: "Computers, Environment and Urban Systems",
            year: 2019,
            abstract_text: "Crowdsourced street view comparisons of perceived safety in 56 cities.",
            sections: vec![(
                "Data",
                "Place Pulse perceived safety comparisons: pairwise votes on street view images collected from online volunteers in 56 cities worldwide from 2013 to 2016, once hosted at http://pulse.media.mit.edu/data/.",
            )],
            table: None,
            urban: true,
            datasets: vec![d("placepulse", "Place Pulse perceived safety comparisons", "Pairwise votes of online volunteers on street view images for perceived safety in 56 cities worldwide.", HUMAN, SOCIAL)
                .time("2013 to 2016")
                .geo("56 cities worldwide")
                .url("http://pulse.media.mit.edu/data/", LinkPlan::DeadRecovered)
                .ev(Name, "Place Pulse perceived safety comparisons")
                .ev(Summary, "pairwise votes on street view images collected from online volunteers in 56 cities worldwide")
                .ev(Time, "collected from online volunteers in 56 cities worldwide from 2013 to 2016")
                .ev(Url, "once hosted at http://pulse.media.mit.edu/data/")],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn06",
            format: html,
            title: "Surface urban heat islands in Chinese cities",
            journal: "Sustainable Cities and Society",
            year: 2020,
            abstract_text: "Land surface temperature shows how the urban heat island varies with city size across China.",
            sections: vec![
                (
                    "Data",
                    "We use MODIS land surface temperature products, daily day and night surface temperature at 1 km acquired by the Terra and Aqua satellites. Tiles covering China were downloaded for 2003 to 2018 from https://lpdaac.usgs.gov.\n\n\
                     City boundaries come from the national administrative divisions published by the Ministry of Civil Affairs of China in 2015.",
                ),
                ("Results", "The surface heat island is strongest in summer nights and grows with the logarithm of city population."),
            ],
            table: None,
            urban: true,
            datasets: vec![
                d("modis", "MODIS land surface temperature", "Daily day and night land surface temperature at 1 km from the Terra and Aqua satellites.", SENSING, SATELLITE)
                    .time("2003 to 2018")
                    .geo("China")
                    .url("https://lpdaac.usgs.gov", LinkPlan::Alive)
                    .ev(Name, "We use MODIS land surface temperature products")
                    .ev(Summary, "daily day and night surface temperature at 1 km acquired by the Terra and Aqua satellites")
                    .ev(Time, "downloaded for 2003 to 2018")
                    .ev(Geo, "Tiles covering China were downloaded")
                    .ev(Url, "from https://lpdaac.usgs.gov"),
                d("divisions", "National administrative divisions of China", "City boundaries from the national administrative divisions of China.", STAT, "Administrative boundaries and zoning maps")
                    .role(Role::Gold(Relevance::L2))
                    .time("2015")
                    .geo("China")
                    .refs(&["Ministry of Civil Affairs of China. National administrative divisions, 2015."])
                    .ev(Name, "national administrative divisions published by the Ministry of Civil Affairs of China")
                    .ev(Summary, "City boundaries come from the national administrative divisions")
                    .ev(Time, "published by the Ministry of Civil Affairs of China in 2015")
                    .ev(Geo, "Ministry of Civil Affairs of China")
                    .ev(Refs, "national administrative divisions published by the Ministry of Civil Affairs of China in 2015"),
            ],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn07",
            format: html,
            title: "Apartment prices and subway access in Seoul",
            journal: "Journal of Housing Economics",
            year: 2021,
            abstract_text: "New subway lines raised nearby housing prices in Seoul.",
            sections: vec![(
                "Data",
                "Seoul apartment transaction records: prices, floor areas and dates of apartment sales in Seoul, South Korea, recorded by the Ministry of Land, Infrastructure and Transport from 2006 to 2019.",
            )],
            table: None,
            urban: true,
            datasets: vec![d("seoul-apt", "Seoul apartment transaction records", "Prices, floor areas and dates of apartment sales in Seoul recorded by the Ministry of Land, Infrastructure and Transport.", HUMAN, SOCIOECON)
                .time("2006 to 2019")
                .geo("Seoul, South Korea")
                .refs(&["Ministry of Land, Infrastructure and Transport. Apartment transaction records."])
                .link(LinkPlan::Recovered)
                .ev(Name, "Seoul apartment transaction records")
                .ev(Summary, "prices, floor areas and dates of apartment sales in Seoul")
                .ev(Time, "recorded by the Ministry of Land, Infrastructure and Transport from 2006 to 2019")
                .ev(Geo, "apartment sales in Seoul, South Korea")
                .ev(Refs, "recorded by the Ministry of Land, Infrastructure and Transport")],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn08",
            format: html,
            title: "Traffic and air quality in Delhi",
            journal: "Atmospheric Environment",
            year: 2021,
            abstract_text: "Traffic congestion explains a large share of the daily variation in urban air pollution in Delhi.",
            sections: vec![
                (
                    "Data",
                    "Pollutant concentrations come from the CPCB continuous ambient air quality monitoring stations, which measured PM2.5 and NO2 every 15 minutes at 37 stations in Delhi, India, from 2015 to 2020. Readings were downloaded from https://app.cpcbccr.com.\n\n\
                     Congestion was proxied by Uber Movement travel times, zone-to-zone travel times of ride-hailing trips in Delhi collected for 2018 to 2019 and formerly released at https://movement.uber.com.",
                ),
                ("Results", "A one-minute increase in zone travel time raised NO2 by 2 percent."),
            ],
            table: None,
            urban: true,
            datasets: vec![
                d("cpcb", "CPCB continuous ambient air quality monitoring stations", "PM2.5 and NO2 measured every 15 minutes at 37 stations in Delhi.", SENSING, GROUND)
                    .time("2015 to 2020")
                    .geo("Delhi, India")
                    .url("https://app.cpcbccr.com", LinkPlan::Alive)
                    .ev(Name, "CPCB continuous ambient air quality monitoring stations")
                    .ev(Summary, "measured PM2.5 and NO2 every 15 minutes at 37 stations in Delhi")
                    .ev(Time, "at 37 stations in Delhi, India, from 2015 to 2020")
                    .ev(Geo, "37 stations in Delhi, India")
                    .ev(Url, "Readings were downloaded from https://app.cpcbccr.com"),
                d("uber", "Uber Movement travel times", "Zone-to-zone travel times of ride-hailing trips in Delhi.", HUMAN, MOBILITY)
                    .role(Role::Gold(Relevance::L2))
                    .time("2018 to 2019")
                    .geo("Delhi, India")
                    .url("https://movement.uber.com", LinkPlan::Dead)
                    .ev(Name, "Congestion was proxied by Uber Movement travel times")
                    .ev(Summary, "zone-to-zone travel times of ride-hailing trips in Delhi")
                    .ev(Time, "collected for 2018 to 2019")
                    .ev(Url, "formerly released at https://movement.uber.com"),
                d("metro", "Delhi Metro ridership records", "Daily station entries of the Delhi Metro.", HUMAN, MOBILITY)
                    .role(Role::Fabricated)
                    .time("2016 to 2019")
                    .geo("Delhi, India")
                    .ev(Name, "Daily ridership was obtained from the Delhi Metro Rail Corporation")
                    .ev(Time, "station entries for 2016 to 2019 were provided by the operator"),
            ],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn09",
            format: html,
            title: "Points of interest and neighborhood vitality in Beijing",
            journal: "Cities",
            year: 2020,
            abstract_text: "The mix of shops and services explains street vitality across neighborhoods in Beijing.",
            sections: vec![
                (
                    "Data",
                    "Baidu Map points of interest, the locations and types of 1.2 million shops, restaurants and services in Beijing, China, were collected in 2018 through the Baidu Map API.",
                ),
                ("Results", "Neighborhoods with diverse points of interest showed more evening activity."),
            ],
            table: None,
            urban: true,
            datasets: vec![d("baidu-poi", "Baidu Map points of interest", "Locations and types of 1.2 million shops, restaurants and services in Beijing.", STAT, POIS)
                .time("2018")
                .geo("Beijing, China")
                .refs(&["Baidu Map API. https://lbsyun.baidu.com"])
                .ev(Name, "Baidu Map points of interest")
                .ev(Summary, "the locations and types of 1.2 million shops, restaurants and services in Beijing")
                .ev(Time, "were collected in 2018 through the Baidu Map API")
                .ev(Geo, "services in Beijing, China")
                .ev(Refs, "collected in 2018 through the Baidu Map API")],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn10",
            format: txt,
            title: "Mobile phone records reveal commuting in Sao Paulo",
            journal: "EPJ Data Science",
            year: 2017,
            abstract_text: "Call detail records trace commuting flows in the Sao Paulo metropolitan area and are compared with the national census.",
            sections: vec![
                (
                    "Data",
                    "Anonymized call detail records of 1.5 million subscribers in the Sao Paulo metropolitan area, Brazil, were provided by a mobile operator for April 2013, with tower locations for every call.\n\n\
                     Commuting flows were validated against the 2010 Brazilian Demographic Census of IBGE, which reports place of work for every municipality in Brazil and is available at https://www.ibge.gov.br.",
                ),
                ("Results", "Phone-based commuting flows matched census flows with a correlation of 0.9."),
            ],
            table: None,
            urban: true,
            datasets: vec![
                d("cdr", "Sao Paulo call detail records", "Anonymized call detail records of 1.5 million subscribers with tower locations for every call.", HUMAN, MOBILITY)
                    .time("April 2013")
                    .geo("Sao Paulo metropolitan area, Brazil")
                    .refs(&["Call detail records provided by a mobile operator under a data agreement."])
                    .ev(Name, "Anonymized call detail records of 1.5 million subscribers in the Sao Paulo metropolitan area")
                    .ev(Summary, "call detail records of 1.5 million subscribers")
                    .ev(Time, "were provided by a mobile operator for April 2013")
                    .ev(Geo, "Sao Paulo metropolitan area, Brazil")
                    .ev(Refs, "were provided by a mobile operator"),
                d("ibge", "Brazilian Demographic Census 2010", "Population census of IBGE reporting place of work for every municipality in Brazil.", POLICY, CENSUS)
                    .role(Role::Gold(Relevance::L2))
                    .time("2010")
                    .geo("Brazil")
                    .url("https://www.ibge.gov.br", LinkPlan::Alive)
                    .ev(Name, "the 2010 Brazilian Demographic Census of IBGE")
                    .ev(Summary, "reports place of work for every municipality in Brazil")
                    .ev(Time, "the 2010 Brazilian Demographic Census")
                    .ev(Geo, "every municipality in Brazil")
                    .ev(Url, "is available at https://www.ibge.gov.br"),
            ],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn11",
            format: html,
            title: "Urban form across European cities from land-use maps",
            journal: "Landscape and Urban Planning",
            year: 2023,
            abstract_text: "Land-use maps and building footprints describe the compactness of urban areas in Europe.",
            sections: vec![
                (
                    "Data",
                    "The Copernicus Urban Atlas provides land-use and land-cover maps for 785 functional urban areas in European countries. Maps for 2012 and 2018 were downloaded from https://land.copernicus.eu.\n\n\
                     Building outlines were obtained from OpenStreetMap building footprints, a worldwide crowdsourced map of buildings retrieved in 2022 from https://www.openstreetmap.org.",
                ),
                ("Results", "Compact cities had more mixed land use and shorter distances between buildings."),
            ],
            table: None,
            urban: true,
            datasets: vec![
                d("urban-atlas", "Copernicus Urban Atlas", "Land-use and land-cover maps for 785 functional urban areas in European countries.", STAT, BUILDINGS)
                    .time("2012 to 2018")
                    .geo("785 functional urban areas in European countries")
                    .url("https://land.copernicus.eu", LinkPlan::Alive)
                    .ev(Name, "The Copernicus Urban Atlas provides land-use and land-cover maps")
                    .ev(Summary, "land-use and land-cover maps for 785 functional urban areas in European countries")
                    .ev(Time, "Maps for 2012 and 2018 were downloaded")
                    .ev(Geo, "785 functional urban areas in European countries")
                    .ev(Url, "downloaded from https://land.copernicus.eu"),
                d("osm-buildings", "OpenStreetMap building footprints", "Worldwide crowdsourced map of building outlines.", STAT, BUILDINGS)
                    .time("2022")
                    .geo("Global")
                    .url("https://www.openstreetmap.org", LinkPlan::Alive)
                    .ev(Name, "obtained from OpenStreetMap building footprints")
                    .ev(Summary, "a worldwide crowdsourced map of buildings")
                    .ev(Time, "retrieved in 2022")
                    .ev(Geo, "a worldwide crowdsourced map of buildings")
                    .ev(Url, "from https://www.openstreetmap.org"),
            ],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn12",
            format: html,
            title: "Check-ins and urban activity rhythms in Tokyo",
            journal: "IEEE Transactions on Systems, Man, and Cybernetics",
            year: 2015,
            abstract_text: "Social media check-ins trace daily activity in Tokyo.",
            sections: vec![(
                "Data",
                "Foursquare check-ins in Tokyo: venue check-ins collected from Foursquare users in Tokyo, Japan from April 2012 to February 2013, first shared at https://sites.google.com/site/yangdingqi/.",
            )],
            table: None,
            urban: true,
            datasets: vec![d("foursquare", "Foursquare check-ins in Tokyo", "Venue check-ins of Foursquare users in Tokyo.", HUMAN, SOCIAL)
                .time("April 2012 to February 2013")
                .geo("Tokyo, Japan")
                .url("https://sites.google.com/site/yangdingqi/", LinkPlan::DeadRecovered)
                .ev(Name, "Foursquare check-ins in Tokyo")
                .ev(Summary, "venue check-ins collected from Foursquare users in Tokyo")
                .ev(Time, "from April 2012 to February 2013")
                .ev(Geo, "Foursquare users in Tokyo, Japan")
                .ev(Url, "first shared at https://sites.google.com/site/yangdingqi/")],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn13",
            format: html,
            title: "Flood exposure of informal settlements in Lagos",
            journal: "Nature Cities",
            year: 2023,
            abstract_text: "Radar imagery and a household survey show that informal urban settlements in Lagos flood more often.",
            sections: vec![
                (
                    "Data",
                    "Flood extents were mapped from Sentinel-1 radar imagery, C-band SAR scenes acquired every 12 days over Lagos, Nigeria, from 2017 to 2021 and downloaded from https://scihub.copernicus.eu.\n\n\
                     We also ran the Lagos household flood survey, face-to-face interviews with 2,400 households in informal settlements of Lagos, Nigeria, collected in 2019.",
                ),
                ("Results", "Informal settlements flooded on average three times per rainy season."),
            ],
            table: None,
            urban: true,
            datasets: vec![
                d("sentinel1", "Sentinel-1 radar imagery", "C-band SAR scenes acquired every 12 days over Lagos.", SENSING, SATELLITE)
                    .time("2017 to 2021")
                    .geo("Lagos, Nigeria")
                    .url("https://scihub.copernicus.eu", LinkPlan::Forbidden)
                    .ev(Name, "mapped from Sentinel-1 radar imagery")
                    .ev(Summary, "C-band SAR scenes acquired every 12 days over Lagos")
                    .ev(Time, "from 2017 to 2021")
                    .ev(Geo, "over Lagos, Nigeria")
                    .ev(Url, "downloaded from https://scihub.copernicus.eu"),
                d("lagos-survey", "Lagos household flood survey", "Face-to-face interviews with 2,400 households in informal settlements of Lagos.", POLICY, CENSUS)
                    .time("2019")
                    .geo("Lagos, Nigeria")
                    .ev(Name, "We also ran the Lagos household flood survey")
                    .ev(Summary, "face-to-face interviews with 2,400 households in informal settlements")
                    .ev(Time, "collected in 2019")
                    .ev(Geo, "informal settlements of Lagos, Nigeria"),
            ],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn14",
            format: html,
            title: "Zoning reform and housing supply in Minneapolis",
            journal: "Journal of the American Planning Association",
            year: 2024,
            abstract_text: "After the end of single-family zoning, housing permits in Minneapolis rose faster than in comparable cities.",
            sections: vec![
                (
                    "Data",
                    "Minneapolis residential building permits, permit dates, addresses and unit counts issued by the City of Minneapolis, Minnesota, were collected from 2010 to 2022 from http://opendata.minneapolismn.gov/datasets/permits.\n\n\
                     The Minneapolis 2040 comprehensive plan, the planning document that ended single-family zoning, was released in 2019 at https://minneapolis2040.com.",
                ),
                ("Results", "Permitted units in newly upzoned parcels tripled within three years."),
            ],
            table: None,
            urban: true,
            datasets: vec![
                d("permits", "Minneapolis residential building permits", "Permit dates, addresses and unit counts of residential building permits.", POLICY, REPORTS)
                    .time("2010 to 2022")
                    .geo("Minneapolis, Minnesota")
                    .url("http://opendata.minneapolismn.gov/datasets/permits", LinkPlan::Dead)
                    .ev(Name, "Minneapolis residential building permits")
                    .ev(Summary, "permit dates, addresses and unit counts")
                    .ev(Time, "were collected from 2010 to 2022")
                    .ev(Geo, "issued by the City of Minneapolis, Minnesota")
                    .ev(Url, "from http://opendata.minneapolismn.gov/datasets/permits"),
                d("plan2040", "Minneapolis 2040 comprehensive plan", "Planning document that ended single-family zoning in Minneapolis.", POLICY, "Policy texts and regulatory frameworks")
                    .role(Role::Gold(Relevance::L2))
                    .time("2019")
                    .geo("Minneapolis, Minnesota")
                    .url("https://minneapolis2040.com", LinkPlan::Alive)
                    .ev(Name, "The Minneapolis 2040 comprehensive plan")
                    .ev(Summary, "the planning document that ended single-family zoning")
                    .ev(Time, "was released in 2019")
                    .ev(Url, "released in 2019 at https://minneapolis2040.com"),
            ],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn15",
            format: txt,
            title: "Household electricity use from smart meters in Melbourne",
            journal: "Energy and Buildings",
            year: 2021,
            abstract_text: "Smart meter readings show how residential electricity demand in Melbourne responds to heat.",
            sections: vec![
                (
                    "Data",
                    "Half-hourly smart meter readings of 3,000 households in Melbourne, Australia, were obtained from the distribution network operator for 2018 to 2019 through https://www.energynetworks.com.au/data.",
                ),
                ("Results", "Demand peaked on days above 35 degrees, driven by air conditioning."),
            ],
            table: None,
            urban: true,
            datasets: vec![d("smartmeter", "Melbourne smart meter readings", "Half-hourly electricity readings of 3,000 households.", SENSING, IOT)
                .time("2018 to 2019")
                .geo("Melbourne, Australia")
                .url("https://www.energynetworks.com.au/data", LinkPlan::Forbidden)
                .ev(Name, "Half-hourly smart meter readings of 3,000 households in Melbourne")
                .ev(Summary, "Half-hourly smart meter readings of 3,000 households")
                .ev(Time, "for 2018 to 2019")
                .ev(Geo, "households in Melbourne, Australia")
                .ev(Url, "through https://www.energynetworks.com.au/data")],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn16",
            format: html,
            title: "Street noise and nightlife in Paris",
            journal: "Environment and Planning B",
            year: 2022,
            abstract_text: "A dense noise sensor network measures how nightlife districts in Paris affect residents.",
            sections: vec![
                (
                    "Data",
                    "Noise levels were recorded by the Bruitparif noise sensor network, 150 acoustic sensors measuring sound levels every second in Paris, France, from 2019 to 2020. The data were provided through https://www.bruitparif.fr.",
                ),
                ("Results", "Night noise exceeded 55 dB on weekends in three districts."),
            ],
            table: None,
            urban: true,
            datasets: vec![d("bruitparif", "Bruitparif noise sensor network", "Sound levels measured every second by 150 acoustic sensors in Paris.", SENSING, GROUND)
                .time("2019 to 2020")
                .geo("Paris, France")
                .url("https://www.bruitparif.fr", LinkPlan::Alive)
                .ev(Name, "recorded by the Bruitparif noise sensor network")
                .ev(Summary, "150 acoustic sensors measuring sound levels every second")
                .ev(Time, "in Paris, France, from 2019 to 2020")
                .ev(Geo, "in Paris, France")
                .ev(Url, "provided through https://www.bruitparif.fr")],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn17",
            format: html,
            title: "Fifty years of global urban expansion",
            journal: "Science",
            year: 2016,
            abstract_text: "Built-up areas worldwide grew faster than urban populations between 1975 and 2015.",
            sections: vec![
                (
                    "Data",
                    "We use the Global Human Settlement Layer, built-up area grids derived from Landsat imagery, released for the whole globe for 1975 to 2015 at https://ghsl.jrc.ec.europa.eu.",
                ),
                ("Results", "Built-up land per person increased in most world regions."),
            ],
            table: None,
            urban: true,
            datasets: vec![d("ghsl", "Global Human Settlement Layer", "Built-up area grids from Landsat imagery for the whole globe.", SENSING, SATELLITE)
                .time("1975 to 2015")
                .geo("Global")
                .url("https://ghsl.jrc.ec.europa.eu", LinkPlan::Alive)
                .ev(Name, "We use the Global Human Settlement Layer")
                .ev(Summary, "built-up area grids derived from Landsat imagery")
                .ev(Time, "released for the whole globe for 1975 to 2015")
                .ev(Geo, "released for the whole globe")
                .ev(Url, "at https://ghsl.jrc.ec.europa.eu")],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn18",
            format: txt,
            title: "On the theory of urban scaling",
            journal: "Journal of the Royal Society Interface",
            year: 2018,
            abstract_text: "We argue that superlinear scaling of city output follows from network effects in social interactions.",
            sections: vec![("Argument", "Consider a city as a network of interacting agents whose contacts grow with density. Output then scales with population to a power above one.")],
            table: None,
            urban: true,
            datasets: vec![],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn19",
            format: html,
            title: "Hydrothermal fluid chemistry at slow-spreading ridges",
            journal: "Geochimica et Cosmochimica Acta",
            year: 2019,
            abstract_text: "We report the chemistry of deep-sea vent fluids sampled along a mid-ocean ridge.",
            sections: vec![("Samples", "Fluids were sampled by a remotely operated vehicle at 14 vents in 2017.")],
            table: None,
            urban: false,
            datasets: vec![],
            gold_only: vec![],
        },
        SynthArticle {
            paper_id: "syn20",
            format: html,
            title: "Folding kinetics of small protein domains",
            journal: "Journal of Molecular Biology",
            year: 2018,
            abstract_text: "Stopped-flow fluorescence shows two-state folding for most small domains.",
            sections: vec![("Experiments", "Folding rates were measured for 42 domains at 25 degrees.")],
            table: None,
            urban: false,
            datasets: vec![],
            gold_only: vec![],
        },
    ]
}

/// A field value with a quote that appears nowhere in the article.
#[derive(Debug, Clone, Copy)]
pub struct Fabrication {
    pub paper_id: &'static str,
    pub dataset: &'static str,
    pub field: CardField,
    pub value: &'static str,
    pub quote: &'static str,
}

/// Ten fabricated fields for the hallucination check, one per card.
pub fn fabrications() -> Vec<Fabrication> {
    let f = |paper_id, dataset, field, value, quote| Fabrication { paper_id, dataset, field, value, quote };
    vec![
        f("syn01", "walkscore", Time, "2008 to 2011", "Scores were first collected in 2008 and refreshed until 2011."),
        f("syn02", "tlc", Geo, "Chicago, Illinois", "The same records were gathered for Chicago, Illinois."),
        f("syn04", "viirs", Url, "https://nightlights.example.net/viirs", "mirrored at https://nightlights.example.net/viirs"),
        f("syn06", "modis", References, "Zhang et al. 2011, Remote Sensing Letters", "as described by Zhang et al. in Remote Sensing Letters"),
        f("syn08", "cpcb", Time, "1998 to 2004", "earlier readings from 1998 to 2004 were digitized"),
        f("syn09", "baidu-poi", Geo, "Shanghai, China", "a second snapshot covered Shanghai"),
        f("syn10", "ibge", Url, "https://censo.example.org/2010", "tables mirrored at https://censo.example.org/2010"),
        f("syn13", "sentinel1", References, "European Space Agency mission handbook, 2012", "the ESA mission handbook of 2012 documents the sensor"),
        f("syn16", "bruitparif", Time, "2005 to 2007", "a pilot network operated from 2005 to 2007"),
        f("syn17", "ghsl", Url, "https://ghsl-archive.example.com", "an archive copy lives at https://ghsl-archive.example.com"),
    ]
}

impl Fabrication {
    /// The card with the fabricated value and quote in place of the seeded
    /// ones for that field.
    pub fn apply(&self, card: &DataCard) -> DataCard {
        let mut c = card.clone();
        c.evidence.retain(|e| e.field != Some(self.field));
        c.evidence.push(EvidenceSpan {
            field: Some(self.field),
            quote: self.quote.to_string(),
            claimed_location: Some("Data".into()),
            confidence: Confidence::High,
        });
        match self.field {
            Time => c.time_coverage_raw = Some(self.value.into()),
            Geo => c.geographic_coverage_raw = Some(self.value.into()),
            Url => c.url = Some(self.value.into()),
            References => c.references = vec![self.value.into()],
            other => panic!("fabrications target optional fields, not {other}"),
        }
        c
    }
}

fn model_answer(a: &SynthArticle) -> String {
    let cards: Vec<Value> = a.datasets.iter().map(SynthDataset::model_record).collect();
    serde_json::to_string_pretty(&json!({ "meta_data": cards })).expect("json")
}

/// Seeded extraction answers, one per article with datasets. The trigger is
/// the article title, which every extraction prompt carries.
pub fn seeds(articles: &[SynthArticle]) -> Vec<SeededResponse> {
    articles
        .iter()
        .filter(|a| !a.datasets.is_empty())
        .map(|a| SeededResponse { trigger: a.title.to_string(), response: model_answer(a), task: Some(tasks::DATASET_EXTRACTION.to_string()) })
        .collect()
}

pub fn benchmark(articles: &[SynthArticle]) -> Benchmark {
    let mut datasets = Vec::new();
    for a in articles {
        for ds in a.datasets.iter().chain(&a.gold_only) {
            let relevance = match (ds.role, a.gold_only.iter().any(|g| g.key == ds.key)) {
                (_, true) => Relevance::L1,
                (Role::Gold(r), _) => r,
                _ => continue,
            };
            datasets.push(BenchmarkDataset {
                benchmark_id: format!("{}/{}", a.paper_id, ds.key),
                paper_id: a.paper_id.to_string(),
                annotation: ds.annotation(),
                relevance,
            });
        }
    }
    Benchmark { name: BENCHMARK_NAME.to_string(), datasets }
}

/// The entry the pipeline makes of a card, with reference providers.
pub fn expected_entry(a: &SynthArticle, ds: &SynthDataset) -> Option<CatalogEntry> {
    let parsed = a.parsed();
    let text = flatten_for_prompt(&parsed);
    let card = ds.card();
    let localized = localize_card(&card, &text);
    let verified = verify_semantics(&parsed.article_id, &card, &localized, &text, &ReferenceJudge::new()).ok()?;
    harmonize(&verified, &SourceArticle::of(&parsed), &canonical_taxonomy(), Gazetteer::bundled()).ok()
}

fn strip_sentinels(text: &str) -> String {
    let kept: Vec<&str> = text.lines().filter(|l| !l.trim_start().starts_with("[[") && l.trim() != "...").collect();
    crate::text::squash_whitespace(&kept.join(" "))
}

/// Replacement page offered for a card whose link should be recovered.
fn replacement(ds: &SynthDataset, entry: &CatalogEntry) -> RecordedHit {
    let host = match ds.key {
        "placepulse" => "https://figshare.com/articles/dataset/place-pulse-2/12345",
        "seoul-apt" => "https://data.seoul.go.kr/dataset/apartment-transactions",
        "foursquare" => "https://www.kaggle.com/datasets/foursquare-tokyo-checkins",
        other => panic!("no replacement planned for {other}"),
    };
    RecordedHit { url: host.to_string(), title: build_link_query(entry), snippet: strip_sentinels(&entry.evidence_context) }
}

/// Search fixtures for every card the linker will search for.
pub fn relink_fixtures(articles: &[SynthArticle]) -> Vec<RecordedSearch> {
    let mut out = Vec::new();
    for a in articles {
        for ds in &a.datasets {
            if !matches!(ds.link, LinkPlan::Dead | LinkPlan::DeadRecovered | LinkPlan::Recovered) {
                continue;
            }
            let Some(entry) = expected_entry(a, ds) else { continue };
            let query = build_link_query(&entry);
            let mut hits = vec![RecordedHit {
                url: format!("https://news.example.org/{}-feature", ds.key),
                title: format!("How cities use {}", ds.name),
                snippet: "A feature story about open data in cities and the people who build it.".into(),
            }];
            if ds.link != LinkPlan::Dead {
                hits.push(replacement(ds, &entry));
            }
            hits.push(RecordedHit {
                url: format!("https://blog.example.com/{}", ds.key),
                title: "Ten tips for better maps".into(),
                snippet: "Colour, labels and projections for readable maps.".into(),
            });
            out.push(RecordedSearch { query, hits });
        }
    }
    out
}

/// Probe fixtures: status code per original URL.
pub fn probes(articles: &[SynthArticle]) -> BTreeMap<String, u16> {
    let mut out = BTreeMap::new();
    for ds in articles.iter().flat_map(|a| &a.datasets) {
        let Some(url) = ds.url else { continue };
        let status = match ds.link {
            LinkPlan::Alive => 200,
            LinkPlan::Forbidden => 403,
            LinkPlan::Dead | LinkPlan::DeadRecovered => 404,
            LinkPlan::None | LinkPlan::Recovered => continue,
        };
        out.insert(url.to_string(), status);
    }
    out
}

/// Two recorded search systems for the comparison table. Each finds a
/// different, overlapping subset of the benchmark.
pub fn comparison_systems(bench: &Benchmark) -> Vec<SystemResults> {
    let filler = |i: usize, engine: &str| SearchHit {
        rank: 0,
        url: format!("https://example.org/{engine}/unrelated-{i}"),
        title: "City guide and travel tips".into(),
        snippet: "Restaurants, hotels and events this weekend.".into(),
        engine_id: engine.into(),
    };
    let mut systems = Vec::new();
    for (engine, finds, depth) in [("web-search", 3usize, 4usize), ("dataset-search", 2, 1)] {
        let mut results = BTreeMap::new();
        for (i, b) in bench.datasets.iter().enumerate() {
            let mut hits: Vec<SearchHit> = (0..3).map(|k| filler(i * 10 + k, engine)).collect();
            if i % finds != 0 {
                let at = i % depth;
                let url = b.annotation.url.clone().unwrap_or_else(|| format!("https://example.org/{engine}/article-{i}"));
                hits.insert(
                    at.min(hits.len()),
                    SearchHit { rank: 0, url, title: b.annotation.name.clone(), snippet: b.annotation.summary.clone(), engine_id: engine.into() },
                );
            }
            for (r, h) in hits.iter_mut().enumerate() {
                h.rank = r as u32 + 1;
            }
            results.insert(b.benchmark_id.clone(), hits);
        }
        systems.push(SystemResults { system: engine.to_string(), results });
    }
    systems
}

pub const PROVIDERS_TOML: &str = "\
# Offline providers for the synthetic corpus.
[completion]
kind = \"reference\"
seeds = \"seeds\"

[embedding]
kind = \"hashed\"

[judge]
kind = \"reference\"

[search]
kind = \"fixture\"
fixtures = \"search\"
engine_id = \"fixture\"

[probe]
kind = \"fixture\"
fixtures = \"probes.json\"

[retry]
max_attempts = 3
base_delay_ms = 0
";

/// Every file of the corpus, keyed by relative path.
pub fn generate() -> BTreeMap<PathBuf, String> {
    let arts = articles();
    let mut files = BTreeMap::new();
    let mut manifest = String::new();
    for a in &arts {
        let path = format!("articles/{}", a.file_name());
        manifest.push_str(&serde_json::to_string(&json!({"path": path, "paper_id": a.paper_id, "journal": a.journal, "year": a.year})).unwrap());
        manifest.push('\n');
        files.insert(PathBuf::from(path), a.source());
    }
    files.insert("manifest.jsonl".into(), manifest);
    files.insert("seeds/extraction.json".into(), pretty(&seeds(&arts)));
    files.insert("search/relink.json".into(), pretty(&relink_fixtures(&arts)));
    files.insert("probes.json".into(), pretty(&probes(&arts)));
    files.insert("providers.toml".into(), PROVIDERS_TOML.to_string());
    let bench = benchmark(&arts);
    files.insert("benchmark.json".into(), bench.to_json());
    for s in comparison_systems(&bench) {
        files.insert(
            format!("systems/{}.json", s.system).into(),
            crate::records::to_record_string(crate::evaluation::COMPARISON_FORMAT, &s),
        );
    }
    files
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

/// Write the corpus under `dir`.
pub fn write_corpus(dir: &Path) -> std::io::Result<usize> {
    let files = generate();
    for (rel, content) in &files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, content)?;
    }
    Ok(files.len())
}

/// Paths in `dir` that differ from the generator, or are missing.
pub fn stale_files(dir: &Path) -> Vec<PathBuf> {
    generate()
        .into_iter()
        .filter(|(rel, content)| std::fs::read_to_string(dir.join(rel)).ok().as_deref() != Some(content.as_str()))
        .map(|(rel, _)| rel)
        .collect()
}
