//! Reference query corpus: the drug-repurposing walkthrough queries plus a
//! smoke query. Two line-wrap artifacts of the printed originals are
//! repaired: a relation name broken before `->` and a string literal broken
//! across lines.

pub const DRUG_CLASSES: &str = r#"MATCH
  (d:DrugBank_Compound)-[:`-compound_classified_as_drug_class->`]->(a:ATC_Class)
WHERE a.name IN ['ATC_Class:C07', 'ATC_Class:C01B',
'ATC_Class:L01X']
RETURN a.name AS ATC_Code, COLLECT(DISTINCT d.name) AS
Drugs
ORDER BY ATC_Code"#;

pub const TOP_BETA_BLOCKER: &str = r#"// Top Beta Blocker
MATCH (d:DrugBank_Compound)-[r]-()
WHERE any(key in [
    'DB00187', 'DB00195', 'DB00264', 'DB00335', 'DB00373',
    'DB00381', 'DB00489',
    'DB00521', 'DB00571', 'DB00598', 'DB00612', 'DB00866',
    'DB00945', 'DB00960',
    'DB01023', 'DB01115', 'DB01136', 'DB01193', 'DB01203',
    'DB01214', 'DB01295',
    'DB01297', 'DB01359', 'DB01580', 'DB04846', 'DB04861',
    'DB08807', 'DB08808',
    'DB09083', 'DB11770', 'DB12212', 'DB13443', 'DB13508',
    'DB13530', 'DB13757', 'DB13775'
] WHERE d.name CONTAINS key)
RETURN d.name AS DrugName, COUNT(r) AS Connections, 'Beta Blockers' AS Category
ORDER BY Connections DESC LIMIT 1"#;

pub const TOP_ANTIARRHYTHMIC: &str = r#"// Top Antiarrhythmic
MATCH (d:DrugBank_Compound)-[r]-()
WHERE any(key in [
    'DB00204', 'DB00280', 'DB00281', 'DB00308', 'DB00379',
    'DB00680', 'DB00908',
    'DB01035', 'DB01056', 'DB01118', 'DB01158', 'DB01182',
    'DB01195', 'DB01228',
    'DB01426', 'DB01429', 'DB04855', 'DB06200', 'DB06217',
    'DB06727', 'DB13358',
    'DB13555', 'DB13645', 'DB13651', 'DB13652', 'DB13653',
    'DB15300'
] WHERE d.name CONTAINS key)
RETURN d.name AS DrugName, COUNT(r) AS Connections,
'Antiarrhythmics' AS Category
ORDER BY Connections DESC LIMIT 1"#;

pub const TOP_ANTIFIBROTIC: &str = r#"// Top Antifibrotic
MATCH (d:DrugBank_Compound)-[r]-()
WHERE any(key in [
    'DB00317', 'DB00398', 'DB00530', 'DB00619', 'DB01254',
    'DB01259', 'DB01268',


        'DB01590', 'DB04849', 'DB04868', 'DB05239', 'DB05294',
        'DB06233', 'DB06287',
        'DB06589', 'DB06595', 'DB06616', 'DB06626', 'DB08865',
        'DB08875', 'DB08877',
        'DB08881', 'DB08896', 'DB08901', 'DB08911', 'DB08912',
        'DB08916', 'DB09053',
        'DB09063', 'DB09073', 'DB09078', 'DB09079', 'DB09330',
        'DB11363', 'DB11526',
        'DB11703', 'DB11718', 'DB11730', 'DB11737', 'DB11800',
        'DB11828', 'DB11907',
        'DB11963', 'DB11967', 'DB11986', 'DB12001', 'DB12130',
        'DB12141', 'DB12267',
        'DB12500', 'DB12874', 'DB13164', 'DB14723'
    ] WHERE d.name CONTAINS key)
RETURN d.name AS DrugName, COUNT(r) AS Connections,
'Antifibrotics' AS Category
ORDER BY Connections DESC LIMIT 1;"#;

pub const TREATS_CARDIOMYOPATHY: &str = r#"// Define the list of compounds to check
WITH [
    'DrugBank_Compound:DB00187',
    'DrugBank_Compound:DB00195', 'DrugBank_Compound:DB00264',
    'DrugBank_Compound:DB00335', 'DrugBank_Compound:DB00373',
    'DrugBank_Compound:DB00381', 'DrugBank_Compound:DB00489',
    'DrugBank_Compound:DB00521', 'DrugBank_Compound:DB00571',
    'DrugBank_Compound:DB00598', 'DrugBank_Compound:DB00612',
    'DrugBank_Compound:DB00866', 'DrugBank_Compound:DB00945',
    'DrugBank_Compound:DB00960', 'DrugBank_Compound:DB01023',
    'DrugBank_Compound:DB01115', 'DrugBank_Compound:DB01136',
    'DrugBank_Compound:DB01193', 'DrugBank_Compound:DB01203',
    'DrugBank_Compound:DB01214', 'DrugBank_Compound:DB01295',
    'DrugBank_Compound:DB01297', 'DrugBank_Compound:DB01359',
    'DrugBank_Compound:DB01580', 'DrugBank_Compound:DB04846',
    'DrugBank_Compound:DB04861', 'DrugBank_Compound:DB08807',
    'DrugBank_Compound:DB08808', 'DrugBank_Compound:DB09083',
    'DrugBank_Compound:DB11770', 'DrugBank_Compound:DB12212',
    'DrugBank_Compound:DB13443', 'DrugBank_Compound:DB13508',
    'DrugBank_Compound:DB13530', 'DrugBank_Compound:DB13757',
    'DrugBank_Compound:DB13775', // Beta Blockers
    'DrugBank_Compound:DB00204',
    'DrugBank_Compound:DB00280', 'DrugBank_Compound:DB00281',
    'DrugBank_Compound:DB00308', 'DrugBank_Compound:DB00379',
    'DrugBank_Compound:DB00680', 'DrugBank_Compound:DB00908',
    'DrugBank_Compound:DB01035', 'DrugBank_Compound:DB01056',
    'DrugBank_Compound:DB01118', 'DrugBank_Compound:DB01158',
    'DrugBank_Compound:DB01182', 'DrugBank_Compound:DB01195',
    'DrugBank_Compound:DB01228', 'DrugBank_Compound:DB01426',
    'DrugBank_Compound:DB01429', 'DrugBank_Compound:DB04855',
    'DrugBank_Compound:DB06200', 'DrugBank_Compound:DB06217',
    'DrugBank_Compound:DB06727', 'DrugBank_Compound:DB13358',
    'DrugBank_Compound:DB13555', 'DrugBank_Compound:DB13645',
    'DrugBank_Compound:DB13651', 'DrugBank_Compound:DB13652',

'DrugBank_Compound:DB13653', 'DrugBank_Compound:DB15300',
// Anti-arrythmic
    'DrugBank_Compound:DB00317',
'DrugBank_Compound:DB00398', 'DrugBank_Compound:DB00530',
'DrugBank_Compound:DB00619', 'DrugBank_Compound:DB01254',
'DrugBank_Compound:DB01259', 'DrugBank_Compound:DB01268',
'DrugBank_Compound:DB01590', 'DrugBank_Compound:DB04849',
'DrugBank_Compound:DB04868', 'DrugBank_Compound:DB05239',
'DrugBank_Compound:DB05294', 'DrugBank_Compound:DB06233',
'DrugBank_Compound:DB06287', 'DrugBank_Compound:DB06589',
'DrugBank_Compound:DB06595', 'DrugBank_Compound:DB06616',
'DrugBank_Compound:DB06626', 'DrugBank_Compound:DB08865',
'DrugBank_Compound:DB08875', 'DrugBank_Compound:DB08877',
'DrugBank_Compound:DB08881', 'DrugBank_Compound:DB08896',
'DrugBank_Compound:DB08901', 'DrugBank_Compound:DB08911',
'DrugBank_Compound:DB08912', 'DrugBank_Compound:DB08916',
'DrugBank_Compound:DB09053', 'DrugBank_Compound:DB09063',
'DrugBank_Compound:DB09073', 'DrugBank_Compound:DB09078',
'DrugBank_Compound:DB09079', 'DrugBank_Compound:DB09330',
'DrugBank_Compound:DB11363', 'DrugBank_Compound:DB11526',
'DrugBank_Compound:DB11703', 'DrugBank_Compound:DB11718',
'DrugBank_Compound:DB11730', 'DrugBank_Compound:DB11737',
'DrugBank_Compound:DB11800', 'DrugBank_Compound:DB11828',
'DrugBank_Compound:DB11907', 'DrugBank_Compound:DB11963',
'DrugBank_Compound:DB11967', 'DrugBank_Compound:DB11986',
'DrugBank_Compound:DB12001', 'DrugBank_Compound:DB12130',
'DrugBank_Compound:DB12141', 'DrugBank_Compound:DB12267',
'DrugBank_Compound:DB12500', 'DrugBank_Compound:DB12874',
'DrugBank_Compound:DB13164', 'DrugBank_Compound:DB14723'
//Anti-fibrotics
] AS drugList

// Match diseases from a specific list
MATCH (disease:MeSH_Disease)
WHERE disease.name IN [
    'MeSH_Disease:D002312','MeSH_Disease:D002311'
]

// Match the drugs that treat these diseases
OPTIONAL MATCH (m)-[:`-treats->`]->(disease)

WHERE m.name IN drugList

// Return results
RETURN disease.name AS Disease, COLLECT(DISTINCT m.name) AS
Compounds"#;

pub const DRUG_TARGETS: &str = r#"MATCH (drug:DrugBank_Compound)-[:`-drug_targets_protein->`]
->(target:UniProt)
WHERE drug.name IN ['DrugBank_Compound:DB00264',
'DrugBank_Compound:DB00571', 'DrugBank_Compound:DB01115',
'DrugBank_Compound:DB01136', 'DrugBank_Compound:DB01135',
'DrugBank_Compound:DB00280', 'DrugBank_Compound:DB01118']
RETURN drug.name AS Drug, COLLECT(target.name) AS Targets"#;

pub const TARGET_INTERACTIONS: &str = r#"MATCH (drug:DrugBank_Compound)-[:`-drug_targets_protein->`]
->(target1:UniProt)
WHERE drug.name IN ['DrugBank_Compound:DB00264',
'DrugBank_Compound:DB00571', 'DrugBank_Compound:DB01115',
'DrugBank_Compound:DB01136', 'DrugBank_Compound:DB01135',
'DrugBank_Compound:DB00280', 'DrugBank_Compound:DB01118']
WITH DISTINCT target1
MATCH
(target1)-[r:interacts_with|`-ppi-`]->(target2:UniProt)
RETURN target1.name AS Target1, COLLECT(DISTINCT
target2.name) AS InteractingProteins"#;

pub const TARGET_ANNOTATIONS: &str = r#"MATCH
  (drug:DrugBank_Compound)-[:`-drug_targets_protein->`]->(target:UniProt)
WHERE drug.name IN ['DrugBank_Compound:DB00264',
  'DrugBank_Compound:DB00571', 'DrugBank_Compound:DB01115',
  'DrugBank_Compound:DB01136', 'DrugBank_Compound:DB01135',
  'DrugBank_Compound:DB00280', 'DrugBank_Compound:DB01118']
WITH DISTINCT target

// Find associated biological functions
OPTIONAL MATCH
  (target)-[:enables]->(func:molecular_function)
WITH target, collect(DISTINCT func.name) AS Functions

// Find associated cellular components
OPTIONAL MATCH
  (target)-[:located_in]->(comp:cellular_component)
WITH target, Functions, collect(DISTINCT comp.name) AS
CellularComponents

// Find associated biological processes
OPTIONAL MATCH
  (target)-[:involved_in]->(proc:biological_process)
RETURN target.name AS Target, Functions,  
CellularComponents, collect(DISTINCT proc.name) AS  
BiologicalProcesses"#;

pub const SMOKE: &str = "MATCH (n) RETURN n LIMIT 5";

/// Top-connected drug per class, the three single-class queries joined.
pub fn top_by_class() -> String {
    [TOP_BETA_BLOCKER, TOP_ANTIARRHYTHMIC, TOP_ANTIFIBROTIC].join("\nUNION ALL\n")
}

/// Every corpus entry in a stable order.
pub fn all() -> Vec<(String, String)> {
    let mut out = vec![
        ("drug_classes".to_string(), DRUG_CLASSES.to_string()),
        ("top_by_class".to_string(), top_by_class()),
    ];
    for (name, text) in [
        ("top_beta_blocker", TOP_BETA_BLOCKER),
        ("top_antiarrhythmic", TOP_ANTIARRHYTHMIC),
        ("top_antifibrotic", TOP_ANTIFIBROTIC),
        ("treats_cardiomyopathy", TREATS_CARDIOMYOPATHY),
        ("drug_targets", DRUG_TARGETS),
        ("target_interactions", TARGET_INTERACTIONS),
        ("target_annotations", TARGET_ANNOTATIONS),
        ("smoke", SMOKE),
    ] {
        out.push((name.to_string(), text.to_string()));
    }
    out
}
