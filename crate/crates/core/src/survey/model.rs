//! Encoded questionnaire items and the per-respondent record.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Raw answer to the overall quality-of-life question (q01).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QolAnswer {
    VeryGood,
    Good,
    Enough,
    Insufficient,
    Bad,
    DontKnow,
}

impl QolAnswer {
    pub const ALL: [QolAnswer; 6] = [
        QolAnswer::VeryGood,
        QolAnswer::Good,
        QolAnswer::Enough,
        QolAnswer::Insufficient,
        QolAnswer::Bad,
        QolAnswer::DontKnow,
    ];

    pub fn label(self) -> &'static str {
        match self {
            QolAnswer::VeryGood => "Very Good",
            QolAnswer::Good => "Good",
            QolAnswer::Enough => "Enough",
            QolAnswer::Insufficient => "Insufficient",
            QolAnswer::Bad => "Bad",
            QolAnswer::DontKnow => "I don't know",
        }
    }

    /// Merged class used for modeling: the sparse negative answers collapse
    /// into class 1.
    pub fn merged_class(self) -> QolClass {
        match self {
            QolAnswer::Bad | QolAnswer::DontKnow | QolAnswer::Insufficient => QolClass::Insufficient,
            QolAnswer::Enough => QolClass::Enough,
            QolAnswer::Good => QolClass::Good,
            QolAnswer::VeryGood => QolClass::VeryGood,
        }
    }
}

impl fmt::Display for QolAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for QolAnswer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .replace('\u{2019}', "'")
            .to_ascii_lowercase()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        match norm.as_str() {
            "very good" => Ok(QolAnswer::VeryGood),
            "good" => Ok(QolAnswer::Good),
            "enough" => Ok(QolAnswer::Enough),
            "insufficient" => Ok(QolAnswer::Insufficient),
            "bad" => Ok(QolAnswer::Bad),
            "i don't know" | "i dont know" => Ok(QolAnswer::DontKnow),
            _ => Err(Error::UnknownLabel(format!("quality-of-life answer {s:?}"))),
        }
    }
}

/// Merged quality-of-life class, numbered 1..=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QolClass {
    Insufficient = 1,
    Enough = 2,
    Good = 3,
    VeryGood = 4,
}

impl QolClass {
    pub const ALL: [QolClass; 4] = [
        QolClass::Insufficient,
        QolClass::Enough,
        QolClass::Good,
        QolClass::VeryGood,
    ];
    pub const COUNT: usize = 4;

    pub fn number(self) -> usize {
        self as usize
    }

    /// Zero-based position, as used for network outputs.
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(i: usize) -> Option<QolClass> {
        QolClass::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            QolClass::Insufficient => "Insufficient",
            QolClass::Enough => "Enough",
            QolClass::Good => "Good",
            QolClass::VeryGood => "Very Good",
        }
    }
}

/// Collapse a raw answer label into its class number in {1, 2, 3, 4}.
pub fn merge_qol_classes(raw: &str) -> crate::Result<usize> {
    Ok(raw.parse::<QolAnswer>()?.merged_class().number())
}

/// Satisfaction items q02..q12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SatisfactionSector {
    SocialMeetings,
    NeighbourlyLife,
    ShoppingFacilities,
    SocialInfrastructure,
    HousingEnvironment,
    FootpathNetwork,
    BikePathNetwork,
    PublicTransport,
    RecreationalAreas,
    PlayingFacilities,
    Security,
}

impl SatisfactionSector {
    pub const ALL: [SatisfactionSector; 11] = [
        SatisfactionSector::SocialMeetings,
        SatisfactionSector::NeighbourlyLife,
        SatisfactionSector::ShoppingFacilities,
        SatisfactionSector::SocialInfrastructure,
        SatisfactionSector::HousingEnvironment,
        SatisfactionSector::FootpathNetwork,
        SatisfactionSector::BikePathNetwork,
        SatisfactionSector::PublicTransport,
        SatisfactionSector::RecreationalAreas,
        SatisfactionSector::PlayingFacilities,
        SatisfactionSector::Security,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Canonical column name, `q02`..`q12`.
    pub fn column(self) -> String {
        format!("q{:02}", self.index() + 2)
    }

    /// Stable snake_case key used in reports and schema files.
    pub fn key(self) -> &'static str {
        match self {
            SatisfactionSector::SocialMeetings => "social_meetings",
            SatisfactionSector::NeighbourlyLife => "neighbourly_life",
            SatisfactionSector::ShoppingFacilities => "shopping_facilities",
            SatisfactionSector::SocialInfrastructure => "social_infrastructure",
            SatisfactionSector::HousingEnvironment => "housing_environment",
            SatisfactionSector::FootpathNetwork => "footpath_network",
            SatisfactionSector::BikePathNetwork => "bike_path_network",
            SatisfactionSector::PublicTransport => "public_transport",
            SatisfactionSector::RecreationalAreas => "recreational_areas",
            SatisfactionSector::PlayingFacilities => "playing_facilities",
            SatisfactionSector::Security => "security",
        }
    }

    pub fn from_key(key: &str) -> Option<SatisfactionSector> {
        Self::ALL.into_iter().find(|s| s.key() == key)
    }
}

impl fmt::Display for SatisfactionSector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Participation items q13..q18 with their code ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParticipationItem {
    Involvement,
    NeighbourContact,
    WishMoreInvolvement,
    WishMoreContact,
    WishSharingOffers,
    PeopleKnown,
}

impl ParticipationItem {
    pub const ALL: [ParticipationItem; 6] = [
        ParticipationItem::Involvement,
        ParticipationItem::NeighbourContact,
        ParticipationItem::WishMoreInvolvement,
        ParticipationItem::WishMoreContact,
        ParticipationItem::WishSharingOffers,
        ParticipationItem::PeopleKnown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn column(self) -> String {
        format!("q{:02}", self.index() + 13)
    }

    pub fn max_code(self) -> u8 {
        match self {
            ParticipationItem::Involvement | ParticipationItem::NeighbourContact => 4,
            _ => 2,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            ParticipationItem::Involvement => "involvement",
            ParticipationItem::NeighbourContact => "neighbour_contact",
            ParticipationItem::WishMoreInvolvement => "wish_more_involvement",
            ParticipationItem::WishMoreContact => "wish_more_contact",
            ParticipationItem::WishSharingOffers => "wish_sharing_offers",
            ParticipationItem::PeopleKnown => "people_known",
        }
    }
}

impl fmt::Display for ParticipationItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

pub const SATISFACTION_MAX: u8 = 5;

/// Satisfaction codes indexed by [`SatisfactionSector`]. `None` is an empty
/// cell; `Some(0)` is an explicit "I don't know".
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatisfactionCodes(pub [Option<u8>; 11]);

impl SatisfactionCodes {
    pub fn get(&self, sector: SatisfactionSector) -> Option<u8> {
        self.0[sector.index()]
    }

    /// Code on the ordinal 1..=5 scale, treating "I don't know" as missing.
    pub fn rated(&self, sector: SatisfactionSector) -> Option<u8> {
        self.get(sector).filter(|&c| c > 0)
    }

    pub fn set(&mut self, sector: SatisfactionSector, code: Option<u8>) {
        self.0[sector.index()] = code;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipationCodes(pub [Option<u8>; 6]);

impl ParticipationCodes {
    pub fn get(&self, item: ParticipationItem) -> Option<u8> {
        self.0[item.index()]
    }

    pub fn set(&mut self, item: ParticipationItem, code: Option<u8>) {
        self.0[item.index()] = code;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demographics {
    /// q23, 1..=4
    pub household: Option<u8>,
    /// q24, 1..=4
    pub education: Option<u8>,
    /// q25, 0..=3
    pub employment: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub respondent_id: String,
    pub neighborhood: String,
    /// Present iff the respondent moved in from another neighborhood.
    pub previous_neighborhood: Option<String>,
    pub qol: QolAnswer,
    pub satisfaction: SatisfactionCodes,
    pub participation: ParticipationCodes,
    pub demographics: Demographics,
    /// Project-sector tags of the respondent's proposals, in input order.
    pub proposals: Vec<String>,
}

impl SurveyResponse {
    pub fn qol_class(&self) -> QolClass {
        self.qol.merged_class()
    }

    /// The (from, to) pair when this respondent relocated between two distinct
    /// neighborhoods.
    pub fn relocation(&self) -> Option<(&str, &str)> {
        match &self.previous_neighborhood {
            Some(prev) if prev != &self.neighborhood => {
                Some((prev.as_str(), self.neighborhood.as_str()))
            }
            _ => None,
        }
    }
}

/// A validated survey. Immutable after load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyDataset {
    pub responses: Vec<SurveyResponse>,
    pub neighborhood_labels: Vec<String>,
    pub sector_labels: Vec<String>,
}

impl SurveyDataset {
    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn has_neighborhood(&self, label: &str) -> bool {
        self.neighborhood_labels.iter().any(|l| l == label)
    }

    pub fn has_sector(&self, label: &str) -> bool {
        self.sector_labels.iter().any(|l| l == label)
    }
}
