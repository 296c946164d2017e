use super::*;
use crate::corpus::{LawDocument, RawReference, RefKind};

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

fn law(id: &str, published: &str, cites: &[&str]) -> LawDocument {
    LawDocument {
        law_id: id.to_string(),
        title: id.to_string(),
        publication_date: date(published),
        ministry_domain: None,
        articles: Vec::new(),
        preamble_refs: Vec::new(),
        body_refs: cites
            .iter()
            .map(|t| RawReference {
                source_unit: id.to_string(),
                target_uri: t.to_string(),
                kind: RefKind::Body,
                specifies_paragraph: false,
                raw_href: t.to_string(),
            })
            .collect(),
        abrogations: Vec::new(),
        full_text: id.to_string(),
    }
}

fn values(s: &TimeSeries) -> Vec<f64> {
    s.points.iter().map(|p| p.value).collect()
}

#[test]
fn laws_enacted_yearly() {
    let mut g = GraphStore::new();
    g.upsert_law(&law("/akn/it/act/2001-03-01/a", "2001-03-01", &[]));
    g.upsert_law(&law("/akn/it/act/2001-09-01/b", "2001-09-01", &[]));
    g.upsert_law(&law(
        "/akn/it/act/2003-05-01/c",
        "2003-05-01",
        &["/akn/it/act/1970-01-01/stub"],
    ));
    let s = timeseries(
        &g,
        Metric::LawsEnacted,
        Granularity::Year,
        date("2001-01-01"),
        date("2003-12-31"),
    )
    .unwrap();
    let starts: Vec<String> = s.points.iter().map(|p| p.period_start.to_string()).collect();
    assert_eq!(starts, ["2001-01-01", "2002-01-01", "2003-01-01"]);
    assert_eq!(values(&s), [2.0, 0.0, 1.0]);
}

#[test]
fn in_force_abrogation_step() {
    let mut g = GraphStore::new();
    let a = "/akn/it/act/2000-01-01/a";
    let b = "/akn/it/act/2010-06-01/b";
    g.upsert_law(&law(a, "2000-01-01", &[]));
    g.upsert_law(&law(b, "2010-06-01", &[]));
    g.add_abrogation(b, a, date("2010-06-01")).unwrap();
    let s = timeseries(
        &g,
        Metric::InForceCount,
        Granularity::Year,
        date("2005-01-01"),
        date("2015-01-01"),
    )
    .unwrap();
    let v = values(&s);
    assert_eq!(v.len(), 11);
    assert!(v[..5].iter().all(|x| *x == 1.0));
    // 2010: A drops out and B comes in.
    assert_eq!(v[5], 1.0);
    assert!(v[5..].iter().all(|x| *x == 1.0));
    assert_eq!(g.in_force_laws(date("2010-05-31")).into_iter().collect::<Vec<_>>(), [a]);
    assert_eq!(g.in_force_laws(date("2010-12-31")).into_iter().collect::<Vec<_>>(), [b]);
}

#[test]
fn citation_metrics() {
    let mut g = GraphStore::new();
    let x = "/akn/it/act/1990-01-01/x";
    g.upsert_law(&law(
        "/akn/it/act/2001-01-01/a",
        "2001-01-01",
        &[x, "/akn/it/act/1991-01-01/y"],
    ));
    g.upsert_law(&law("/akn/it/act/2002-01-01/b", "2002-01-01", &[x]));
    let avg = timeseries(
        &g,
        Metric::AvgOutgoingCitations,
        Granularity::Year,
        date("2000-01-01"),
        date("2002-12-31"),
    )
    .unwrap();
    assert_eq!(values(&avg), [0.0, 2.0, 1.5]);
    let new = timeseries(
        &g,
        Metric::NewCitations,
        Granularity::Year,
        date("2000-01-01"),
        date("2002-12-31"),
    )
    .unwrap();
    assert_eq!(values(&new), [0.0, 2.0, 1.0]);
}

#[test]
fn monthly_periods_and_range() {
    let p = periods(date("2020-11-15"), date("2021-02-01"), Granularity::Month).unwrap();
    assert_eq!(p.len(), 4);
    assert_eq!(p[0], (date("2020-11-01"), date("2020-11-30")));
    assert_eq!(p[3], (date("2021-02-01"), date("2021-02-28")));
    let g = GraphStore::new();
    assert!(matches!(
        timeseries(
            &g,
            Metric::LawsEnacted,
            Granularity::Year,
            date("2021-01-01"),
            date("2020-01-01")
        ),
        Err(MonitorError::InvalidRange { .. })
    ));
}

#[test]
fn star_histogram() {
    let mut g = GraphStore::new();
    let hub = "/akn/it/act/2000-01-01/hub";
    g.upsert_law(&law(hub, "2000-01-01", &[]));
    for i in 0..5 {
        let id = format!("/akn/it/act/2001-01-01/s{i}");
        g.upsert_law(&law(&id, "2001-01-01", &[hub]));
    }
    let h = degree_distribution(&g, EdgeKind::Cites, Direction::In);
    assert_eq!(h.bins, [(0, 5), (5, 1)]);
    assert_eq!(h.node_total(), 6);
    let out = degree_distribution(&g, EdgeKind::Cites, Direction::Out);
    assert_eq!(out.bins, [(0, 1), (1, 5)]);
    assert!(degree_distribution(&GraphStore::new(), EdgeKind::Cites, Direction::In)
        .bins
        .is_empty());
}

#[test]
fn stubs_only_in_indegree() {
    let mut g = GraphStore::new();
    g.upsert_law(&law(
        "/akn/it/act/2001-01-01/a",
        "2001-01-01",
        &["/akn/it/act/1990-01-01/stub"],
    ));
    assert_eq!(degree_distribution(&g, EdgeKind::Cites, Direction::In).node_total(), 2);
    assert_eq!(degree_distribution(&g, EdgeKind::Cites, Direction::Out).node_total(), 1);
}

#[test]
fn number_format() {
    assert_eq!(format_number(2.0 / 3.0), "0.666667");
    assert_eq!(format_number(2.0), "2");
    assert_eq!(format_number(1.5), "1.5");
    assert_eq!(format_number(-0.0000001), "0");
    assert_eq!(format_number(1234567.0), "1234567");
}

fn three_points() -> TimeSeries {
    TimeSeries {
        metric: Metric::AvgOutgoingCitations,
        granularity: Granularity::Year,
        points: vec![
            SeriesPoint {
                period_start: date("2001-01-01"),
                value: 2.0 / 3.0,
            },
            SeriesPoint {
                period_start: date("2002-01-01"),
                value: 0.0,
            },
            SeriesPoint {
                period_start: date("2003-01-01"),
                value: 1.5,
            },
        ],
    }
}

#[test]
fn csv_export() {
    let csv = export_dataset(Dataset::Series(&three_points()), ExportFormat::Csv);
    assert_eq!(
        String::from_utf8(csv).unwrap(),
        "period,value\n2001-01-01,0.666667\n2002-01-01,0\n2003-01-01,1.5\n"
    );
    let h = DegreeHistogram {
        edge_kind: EdgeKind::Cites,
        direction: Direction::In,
        bins: vec![(0, 5), (5, 1)],
    };
    assert_eq!(
        export_dataset(Dataset::Histogram(&h), ExportFormat::Csv),
        b"degree,count\n0,5\n5,1\n"
    );
}

#[test]
fn json_round_trip() {
    let s = three_points();
    let bytes = export_dataset(Dataset::Series(&s), ExportFormat::Json);
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(text.contains("\"value\":0.666667"));
    let back: TimeSeries = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(back.points.len(), 3);
    assert_eq!(back.metric, s.metric);
    assert_eq!(back.points[0].value, 0.666667);
    assert_eq!(export_dataset(Dataset::Series(&back), ExportFormat::Json), bytes);

    let h = DegreeHistogram {
        edge_kind: EdgeKind::Cites,
        direction: Direction::Out,
        bins: vec![(1, 2)],
    };
    let back: DegreeHistogram =
        serde_json::from_slice(&export_dataset(Dataset::Histogram(&h), ExportFormat::Json)).unwrap();
    assert_eq!(back, h);
}

#[test]
fn parse_names() {
    assert_eq!("in_force_count".parse::<Metric>().unwrap(), Metric::InForceCount);
    assert_eq!("MONTH".parse::<Granularity>().unwrap(), Granularity::Month);
    assert!("weekly".parse::<Granularity>().is_err());
    assert_eq!("csv".parse::<ExportFormat>().unwrap(), ExportFormat::Csv);
}
