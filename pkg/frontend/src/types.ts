// Wire types for the reviewd HTTP API (docs/review-api.md in the toolkit repo).

export type ReviewState = 'pending' | 'flagged' | 'corrected' | 'approved';

export interface VideoSummary {
  video_id: string;
  duration_s: number;
  n_omni_events: number;
  review_state: string;
  filter_status: string;
  split: string;
}

export interface VideoListResponse {
  videos: VideoSummary[];
  next_page_token: string | null;
}

export interface ModalEventWire {
  event_id: string;
  interval: [number, number];
  caption: string | null;
  asr_text: string | null;
}

export interface OmniEventWire {
  event_id: string;
  interval: [number, number];
  caption: string | null;
  correlation_tags: string[];
  has_temporal_dynamics: boolean;
  visual_event_ids: string[];
  audio_event_ids: string[];
  state: ReviewState;
  flag_reason: string | null;
  revision: number;
}

export interface MediaUrls {
  audio_url?: string;
  frames_url?: string;
}

export interface VideoEventsResponse {
  video_id: string;
  duration_s: number;
  review_state: string;
  media?: MediaUrls | null;
  omni_events: OmniEventWire[];
  visual_events: ModalEventWire[];
  audio_events: ModalEventWire[];
}

export interface MutationResponse {
  event_id: string;
  revision: number;
  state: ReviewState;
}

export interface CorrectionBody {
  base_revision: number;
  author: string;
  interval?: [number, number];
  caption?: string;
}
