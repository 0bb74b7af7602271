// Shared with the acceptance harness.

pub const CASES: &[(&str, &[&str])] = &[
    // the smartphone activity card
    ("USA (city-level, 1,609 cities)", &["US"]),
    ("USA", &["US"]),
    ("U.S.", &["US"]),
    ("U.S.A.", &["US"]),
    ("United States of America", &["US"]),
    ("the United States", &["US"]),
    ("United Kingdom", &["GB"]),
    ("UK", &["GB"]),
    ("England and Wales", &["GB"]),
    ("Great Britain", &["GB"]),
    ("People's Republic of China", &["CN"]),
    ("Mainland China", &["CN"]),
    ("PRC", &["CN"]),
    ("South Korea", &["KR"]),
    ("Republic of Korea", &["KR"]),
    ("Russia", &["RU"]),
    ("Russian Federation", &["RU"]),
    ("Türkiye", &["TR"]),
    ("Turkey", &["TR"]),
    ("Ivory Coast", &["CI"]),
    ("Côte d'Ivoire", &["CI"]),
    ("DRC", &["CD"]),
    ("Democratic Republic of the Congo", &["CD"]),
    ("Holland", &["NL"]),
    ("The Netherlands", &["NL"]),
    ("Burma", &["MM"]),
    ("Viet Nam", &["VN"]),
    ("Vietnam", &["VN"]),
    ("UAE", &["AE"]),
    ("Federal Republic of Germany", &["DE"]),
    ("Brasil", &["BR"]),
    ("Deutschland", &["DE"]),
    ("Sao Paulo metropolitan area, Brazil", &["BR"]),
    ("New York City", &["US"]),
    ("Seoul, South Korea", &["KR"]),
    ("Lagos, Nigeria", &["NG"]),
    ("Nigeria, Kenya and Ghana", &["GH", "KE", "NG"]),
    ("France and Germany", &["DE", "FR"]),
    ("Tokyo", &["JP"]),
];

pub const GLOBAL: &[&str] = &["Global", "worldwide", "56 cities worldwide", "International, 120 countries"];

pub const UNRESOLVED: &[&str] = &[
    "",
    "N/A",
    "Atlantis",
    "Middle-earth",
    "785 functional urban areas in European countries",
    "study region",
    "we",
    "us",
    "Xanadu and Shangri-La",
    "grid cells",
];
