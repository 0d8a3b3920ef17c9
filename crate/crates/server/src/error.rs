use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use fleetcharge_core::api::ErrorBody;
use fleetcharge_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("malformed request: {0}")]
    BadJson(#[from] JsonRejection),
    #[error("no dispatcher with id {0}")]
    NoDispatcher(u64),
    #[error("worker task failed: {0}")]
    Join(#[from] tokio::task::JoinError),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self {
            ApiError::Core(e) => match e {
                CoreError::InstanceMismatch(..) => StatusCode::CONFLICT,
                CoreError::TooLarge { .. } | CoreError::BoundViolated { .. } => StatusCode::UNPROCESSABLE_ENTITY,
                CoreError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
                _ => StatusCode::BAD_REQUEST,
            },
            ApiError::BadJson(r) => r.status(),
            ApiError::NoDispatcher(_) => StatusCode::NOT_FOUND,
            ApiError::Join(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ApiError::Core(e) => match e {
                CoreError::InvalidConfig(_) => "invalid_config",
                CoreError::InvalidSession { .. } => "invalid_session",
                CoreError::OutOfOrder { .. } => "out_of_order",
                CoreError::TooLarge { .. } => "too_large",
                CoreError::InstanceMismatch(..) => "instance_mismatch",
                CoreError::BoundViolated { .. } => "bound_violated",
                CoreError::Trace { .. } => "trace",
                _ => "invalid",
            },
            ApiError::BadJson(_) => "bad_json",
            ApiError::NoDispatcher(_) => "not_found",
            ApiError::Join(_) => "internal",
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!("{self}");
        }
        let body = ErrorBody {
            kind: self.kind().to_string(),
            message: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}
