//! Read-only HTTP API over a graph snapshot.
//!
//! | route | response |
//! |---|---|
//! | `GET /api/v1/search?genus=…` or `?ark=…` | JSON list of [`SearchHit`] |
//! | `GET /api/v1/entities/{ark}` | JSON [`EntityBody`] |
//! | `GET /api/v1/bundles/{ark}.zip` | zip bundle |
//! | `GET /healthz` | `ok` |
//!
//! Every request reads one snapshot of the shared graph; a reload swaps the
//! snapshot without blocking requests already in flight.

use std::sync::Arc;

use axum::extract::{Path, Query as QueryParams, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use specimeta_core::ark::ArkId;
use specimeta_core::export::{build_bundle, ExportError};
use specimeta_core::graph::{vocab, EntityNode, Graph, PatternTerm, Query, SharedGraph, TriplePattern};
use specimeta_core::model::{EntityClass, Node, Term};
use tokio::net::TcpListener;

pub struct AppState {
    graph: SharedGraph,
    citation_text: String,
}

impl AppState {
    pub fn new(graph: Graph, citation_text: impl Into<String>) -> Self {
        AppState {
            graph: SharedGraph::new(graph),
            citation_text: citation_text.into(),
        }
    }

    pub fn snapshot(&self) -> Arc<Graph> {
        self.graph.snapshot()
    }

    /// Swap in a new graph. Requests already running keep their snapshot.
    pub fn reload(&self, graph: Graph) {
        self.graph.replace(graph);
    }

    pub fn citation_text(&self) -> &str {
        &self.citation_text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchHit {
    pub ark: String,
    pub entity_class: String,
    pub genus: Option<String>,
    pub scientific_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StatementBody {
    pub predicate: String,
    pub value: String,
    /// Datatype name for literals, `iri` for resources.
    pub datatype: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityBody {
    pub ark: String,
    pub class: String,
    pub statements: Vec<StatementBody>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: error.to_string(),
                detail: detail.into(),
            },
        }
    }

    fn not_an_ark(text: &str) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "NotAnArk", format!("{text:?} is not a valid ARK"))
    }

    fn unknown(ark: &ArkId) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "UnknownRoot", format!("no entity {ark}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/v1/search", get(search))
        .route("/api/v1/entities/{*ark}", get(entity))
        .route("/api/v1/bundles/{*ark}", get(bundle))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(state)
}

/// Serve until the listener fails.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

fn parse_ark(text: &str) -> Result<ArkId, ApiError> {
    let text = text.trim_start_matches('/');
    text.parse().map_err(|_| ApiError::not_an_ark(text))
}

fn genus_term() -> Term {
    Term::new("dwc", "genus").expect("static term")
}

fn scientific_name_term() -> Term {
    Term::new("dwc", "scientificName").expect("static term")
}

/// The CollectionEvent describing `ark`: itself, or its child when `ark` is
/// a Multimedia.
fn event_of(graph: &Graph, entity: &EntityNode) -> Option<EntityNode> {
    match entity.class {
        EntityClass::CollectionEvent => Some(entity.clone()),
        EntityClass::Multimedia => {
            let node = Node::Ark(entity.ark.clone());
            graph
                .with_predicate_object(&vocab::is_part_of(), &node)
                .filter_map(|s| s.subject().as_ark())
                .filter_map(|a| graph.entity(a))
                .filter(|e| e.class == EntityClass::CollectionEvent)
                .min_by(|a, b| a.ark.cmp(&b.ark))
        }
        _ => None,
    }
}

fn hit(graph: &Graph, entity: &EntityNode) -> SearchHit {
    let event = event_of(graph, entity);
    SearchHit {
        ark: entity.ark.to_string(),
        entity_class: entity.class.to_string(),
        genus: event.as_ref().and_then(|e| e.first_text(&genus_term())),
        scientific_name: event.as_ref().and_then(|e| e.first_text(&scientific_name_term())),
    }
}

/// Multimedia entities whose CollectionEvent has exactly this genus.
pub fn search_genus(graph: &Graph, genus: &str) -> Vec<SearchHit> {
    let reg = graph.registry();
    let class_iri = Node::iri(EntityClass::CollectionEvent.iri(reg)).expect("absolute class IRI");
    let iri = |t: Term| Node::Iri(reg.expand(&t).expect("registered term"));
    let query = Query::new(
        vec![
            TriplePattern::new(
                PatternTerm::var("e"),
                PatternTerm::Const(iri(vocab::rdf_type())),
                PatternTerm::Const(class_iri),
            ),
            TriplePattern::new(
                PatternTerm::var("e"),
                PatternTerm::Const(iri(genus_term())),
                PatternTerm::Const(Node::string(genus)),
            ),
        ],
        vec!["e".into()],
    )
    .expect("well-formed query");
    let mut parents: Vec<ArkId> = graph
        .query(&query)
        .iter()
        .filter_map(|b| b["e"].as_ark())
        .filter_map(|e| graph.entity(e)?.parent)
        .collect();
    parents.sort();
    parents.dedup();
    parents
        .iter()
        .filter_map(|a| graph.entity(a))
        .map(|e| hit(graph, &e))
        .collect()
}

#[derive(Debug, Deserialize)]
pub struct SearchParams {
    genus: Option<String>,
    ark: Option<String>,
}

async fn search(
    State(state): State<Arc<AppState>>,
    QueryParams(params): QueryParams<SearchParams>,
) -> Result<Json<Vec<SearchHit>>, ApiError> {
    let graph = state.snapshot();
    match (params.genus, params.ark) {
        (Some(genus), None) => Ok(Json(search_genus(&graph, &genus))),
        (None, Some(ark)) => {
            let ark = parse_ark(&ark)?;
            let entity = graph.entity(&ark).ok_or_else(|| ApiError::unknown(&ark))?;
            Ok(Json(vec![hit(&graph, &entity)]))
        }
        _ => Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "BothOrNeitherParams",
            "give exactly one of genus or ark",
        )),
    }
}

pub fn entity_body(entity: &EntityNode) -> EntityBody {
    EntityBody {
        ark: entity.ark.to_string(),
        class: entity.class.to_string(),
        statements: entity
            .statements
            .iter()
            .map(|s| StatementBody {
                predicate: s.predicate().to_string(),
                value: s.object().text(),
                datatype: match s.object().as_literal() {
                    Some(l) => l.datatype().name().to_string(),
                    None => "iri".to_string(),
                },
            })
            .collect(),
    }
}

async fn entity(State(state): State<Arc<AppState>>, Path(ark): Path<String>) -> Result<Json<EntityBody>, ApiError> {
    let graph = state.snapshot();
    let ark = parse_ark(&ark)?;
    let entity = graph.entity(&ark).ok_or_else(|| ApiError::unknown(&ark))?;
    Ok(Json(entity_body(&entity)))
}

async fn bundle(State(state): State<Arc<AppState>>, Path(ark): Path<String>) -> Result<Response, ApiError> {
    let graph = state.snapshot();
    let ark = parse_ark(ark.strip_suffix(".zip").unwrap_or(&ark))?;
    let internal = |e: ExportError| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "ExportFailed", e.to_string());
    let bytes = match build_bundle(&graph, &ark, state.citation_text()) {
        Ok(b) => b.to_zip().map_err(internal)?,
        Err(ExportError::UnknownRoot(a)) => return Err(ApiError::unknown(&a)),
        Err(e) => return Err(internal(e)),
    };
    let disposition = format!("attachment; filename=\"{}.zip\"", ark.file_stem());
    Ok((
        [
            (header::CONTENT_TYPE, "application/zip".to_string()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        bytes,
    )
        .into_response())
}
