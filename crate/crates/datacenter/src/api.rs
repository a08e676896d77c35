//! HTTP/JSON surface of the datacenter.
//!
//! Errors are returned as `{error_code, message, details}`.

use std::sync::Arc;

use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use fdf_core::route::{BusRegistration, Route};
use fdf_core::GeoPoint;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::{BookingOutcome, BookingRequest, BusReport, Datacenter, DatacenterError};

type Shared = Arc<Datacenter>;

pub fn router(dc: Shared) -> Router {
    Router::new()
        .route("/passengers", post(register_passenger))
        .route("/passengers/{id}/location", put(update_location))
        .route("/routes", post(register_route))
        .route("/reports", post(ingest_report))
        .route("/stops/nearest", get(nearest_stop))
        .route("/buses", get(query_buses).post(register_bus))
        .route("/buses/{id}/availability", get(availability))
        .route("/bookings", post(book_seat))
        .route("/bookings/{id}", delete(cancel_booking))
        .fallback(|| async { error_body(StatusCode::NOT_FOUND, "not_found", "no such endpoint", Value::Null) })
        .with_state(dc)
}

pub struct ApiError(DatacenterError);

impl From<DatacenterError> for ApiError {
    fn from(e: DatacenterError) -> Self {
        Self(e)
    }
}

pub fn status_for(e: &DatacenterError) -> StatusCode {
    use DatacenterError::*;
    match e {
        InvalidRoute(_) => StatusCode::UNPROCESSABLE_ENTITY,
        InvalidRequest(_) => StatusCode::BAD_REQUEST,
        Conflict(_) | StaleReport { .. } | DuplicateBooking { .. } | AlreadyCancelled(_) | NotActive(_) => {
            StatusCode::CONFLICT
        }
        UnknownRoute(_) | UnknownStop(_) | UnknownBus(_) | UnknownPassenger(_) | UnknownBooking(_) | NoData(_)
        | NoAlternative(_) => StatusCode::NOT_FOUND,
        PrivacyRefused(_) => StatusCode::FORBIDDEN,
        Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let details = match &self.0 {
            DatacenterError::InvalidRoute(v) => json!({ "violations": v }),
            DatacenterError::StaleReport { bus_id, timestamp, last } => {
                json!({ "bus_id": bus_id, "timestamp": timestamp, "last_timestamp": last })
            }
            _ => Value::Null,
        };
        error_body(status_for(&self.0), self.0.code(), &self.0.to_string(), details)
    }
}

fn error_body(status: StatusCode, code: &str, message: &str, details: Value) -> Response {
    (status, Json(json!({ "error_code": code, "message": message, "details": details }))).into_response()
}

type ApiResult<T> = Result<T, ApiError>;

/// JSON body extractor whose rejections use the API error format.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = Response;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Self(v)),
            Err(rej) => Err(error_body(StatusCode::BAD_REQUEST, "invalid_request", &rej.body_text(), Value::Null)),
        }
    }
}

pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = Response;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        match Query::<T>::from_request_parts(parts, state).await {
            Ok(Query(v)) => Ok(Self(v)),
            Err(rej) => Err(error_body(StatusCode::BAD_REQUEST, "invalid_request", &rej.body_text(), Value::Null)),
        }
    }
}

#[derive(Deserialize)]
struct NewPassenger {
    passenger_id: String,
    privacy_accepted: bool,
}

async fn register_passenger(State(dc): State<Shared>, ApiJson(body): ApiJson<NewPassenger>) -> ApiResult<Response> {
    let session = dc.register_passenger(&body.passenger_id, body.privacy_accepted)?;
    Ok(Json(session).into_response())
}

async fn update_location(
    State(dc): State<Shared>,
    Path(id): Path<String>,
    ApiJson(location): ApiJson<GeoPoint>,
) -> ApiResult<StatusCode> {
    dc.update_location(&id, location)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn register_route(State(dc): State<Shared>, ApiJson(route): ApiJson<Route>) -> ApiResult<Response> {
    let route_id = dc.register_route(route)?;
    Ok((StatusCode::CREATED, Json(json!({ "route_id": route_id }))).into_response())
}

async fn register_bus(State(dc): State<Shared>, ApiJson(bus): ApiJson<BusRegistration>) -> ApiResult<Response> {
    let bus_id = bus.bus_id.clone();
    dc.register_bus(bus)?;
    Ok((StatusCode::CREATED, Json(json!({ "bus_id": bus_id }))).into_response())
}

async fn ingest_report(State(dc): State<Shared>, ApiJson(report): ApiJson<BusReport>) -> ApiResult<Response> {
    let version = dc.ingest_report(report)?;
    Ok(Json(json!({ "version": version })).into_response())
}

#[derive(Deserialize)]
struct LatLonQuery {
    lat: f64,
    lon: f64,
}

async fn nearest_stop(State(dc): State<Shared>, ApiQuery(q): ApiQuery<LatLonQuery>) -> ApiResult<Response> {
    let point = GeoPoint::new(q.lat, q.lon).map_err(|e| DatacenterError::InvalidRequest(e.to_string()))?;
    let (stop, distance_m) = dc.nearest_stop(point)?;
    Ok(Json(json!({ "stop_id": stop.stop_id, "name": stop.name, "distance_m": distance_m })).into_response())
}

#[derive(Deserialize)]
struct BusQuery {
    source: String,
    dest: String,
}

async fn query_buses(State(dc): State<Shared>, ApiQuery(q): ApiQuery<BusQuery>) -> ApiResult<Response> {
    Ok(Json(dc.query_buses(&q.source, &q.dest)?).into_response())
}

async fn availability(State(dc): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let snapshot = dc.get_availability(&id)?;
    Ok(Json(&*snapshot).into_response())
}

async fn book_seat(State(dc): State<Shared>, ApiJson(req): ApiJson<BookingRequest>) -> ApiResult<Response> {
    Ok(match dc.book_seat(&req)? {
        BookingOutcome::Booked(booking) => (StatusCode::CREATED, Json(booking)).into_response(),
        BookingOutcome::Full { booking, suggested_stop } => (
            StatusCode::CONFLICT,
            Json(json!({
                "reason": "full",
                "suggested_stop": suggested_stop,
                "error_code": "bus_full",
                "message": format!("bus {} has no available seat", booking.bus_id),
                "details": { "booking_id": booking.booking_id },
            })),
        )
            .into_response(),
    })
}

async fn cancel_booking(State(dc): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    dc.cancel_booking(&id)?;
    Ok(StatusCode::NO_CONTENT)
}
