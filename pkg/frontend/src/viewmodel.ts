// Timeline view model: a faithful mirror of the server's event response
// plus purely local state (selection, dirty edits). Dirty edits are never
// auto-submitted; they become a correction payload only on explicit submit.

import { containedPosition, positionFor, snapToGrid, type LaneModel } from './layout.js';
import type { CorrectionBody, VideoEventsResponse } from './types.js';

export interface DirtyEdit {
  eventId: string;
  interval?: [number, number];
  caption?: string;
}

export interface TimelineViewModel {
  videoId: string;
  durationS: number;
  server: VideoEventsResponse;
  selectedId: string | null;
  dirty: DirtyEdit | null;
}

export function fromEventsResponse(
  response: VideoEventsResponse,
  previous?: TimelineViewModel,
): TimelineViewModel {
  const stillExists = previous?.selectedId
    ? response.omni_events.some((e) => e.event_id === previous.selectedId)
    : false;
  return {
    videoId: response.video_id,
    durationS: response.duration_s,
    server: response,
    selectedId: stillExists ? previous!.selectedId : response.omni_events[0]?.event_id ?? null,
    dirty: null,
  };
}

export function selectedEvent(vm: TimelineViewModel) {
  return vm.server.omni_events.find((e) => e.event_id === vm.selectedId) ?? null;
}

export function selectNext(vm: TimelineViewModel, step: 1 | -1 = 1): TimelineViewModel {
  const events = vm.server.omni_events;
  if (events.length === 0) return vm;
  const index = events.findIndex((e) => e.event_id === vm.selectedId);
  const next = events[(index + step + events.length) % events.length]!;
  // moving selection discards any unsubmitted edit
  return { ...vm, selectedId: next.event_id, dirty: null };
}

/** Stage a boundary edit (snapped to the grid); nothing is sent anywhere. */
export function stageBoundaryEdit(
  vm: TimelineViewModel,
  startS: number,
  endS: number,
): TimelineViewModel {
  const event = selectedEvent(vm);
  if (!event) return vm;
  const snapped: [number, number] = [snapToGrid(startS), snapToGrid(endS)];
  if (snapped[1] <= snapped[0]) return vm;
  const dirty: DirtyEdit = { ...(vm.dirty ?? { eventId: event.event_id }), interval: snapped };
  return { ...vm, dirty };
}

/** Nudge one edge of the selected event by whole grid steps. */
export function nudgeBoundary(
  vm: TimelineViewModel,
  edge: 'start' | 'end',
  steps: number,
): TimelineViewModel {
  const event = selectedEvent(vm);
  if (!event) return vm;
  const base = vm.dirty?.interval ?? event.interval;
  const delta = steps * 0.1;
  const next: [number, number] =
    edge === 'start' ? [base[0] + delta, base[1]] : [base[0], base[1] + delta];
  return stageBoundaryEdit(vm, next[0], next[1]);
}

export function stageCaptionEdit(vm: TimelineViewModel, caption: string): TimelineViewModel {
  const event = selectedEvent(vm);
  if (!event) return vm;
  const dirty: DirtyEdit = { ...(vm.dirty ?? { eventId: event.event_id }), caption };
  return { ...vm, dirty };
}

export function discardEdit(vm: TimelineViewModel): TimelineViewModel {
  return { ...vm, dirty: null };
}

/** The correction to submit for the staged edit, carrying the revision the
 * edit was based on (optimistic concurrency). Null when nothing changed. */
export function correctionPayload(vm: TimelineViewModel, author: string): CorrectionBody | null {
  const event = selectedEvent(vm);
  if (!event || !vm.dirty || vm.dirty.eventId !== event.event_id) return null;
  const body: CorrectionBody = { base_revision: event.revision, author };
  let changed = false;
  if (vm.dirty.interval) {
    const [a, b] = vm.dirty.interval;
    if (a !== event.interval[0] || b !== event.interval[1]) {
      body.interval = vm.dirty.interval;
      changed = true;
    }
  }
  if (vm.dirty.caption !== undefined && vm.dirty.caption !== (event.caption ?? '')) {
    body.caption = vm.dirty.caption;
    changed = true;
  }
  return changed ? body : null;
}

/** Lane models for rendering; omni blocks carry their audio constituents
 * positioned inside the block. */
export function buildLanes(vm: TimelineViewModel): LaneModel[] {
  const duration = vm.durationS;
  const audioById = new Map(vm.server.audio_events.map((e) => [e.event_id, e]));

  const modalLane = (name: 'visual' | 'audio', events: typeof vm.server.visual_events): LaneModel => ({
    name,
    blocks: events.map((e) => ({
      eventId: e.event_id,
      label: e.caption ?? '',
      startS: e.interval[0],
      endS: e.interval[1],
      ...positionFor(e.interval[0], e.interval[1], duration),
    })),
  });

  const omniLane: LaneModel = {
    name: 'omni',
    blocks: vm.server.omni_events.map((e) => {
      const interval =
        vm.dirty?.eventId === e.event_id && vm.dirty.interval ? vm.dirty.interval : e.interval;
      return {
        eventId: e.event_id,
        label: e.caption ?? '',
        startS: interval[0],
        endS: interval[1],
        state: e.state,
        selected: e.event_id === vm.selectedId,
        ...positionFor(interval[0], interval[1], duration),
        contained: e.audio_event_ids
          .map((id) => audioById.get(id))
          .filter((a): a is NonNullable<typeof a> => a != null)
          .map((a) => containedPosition(a.interval[0], a.interval[1], interval[0], interval[1])),
      };
    }),
  };

  return [modalLane('visual', vm.server.visual_events), modalLane('audio', vm.server.audio_events), omniLane];
}
