import { describe, expect, it } from 'vitest';

import {
  buildLanes,
  correctionPayload,
  discardEdit,
  fromEventsResponse,
  nudgeBoundary,
  selectNext,
  stageBoundaryEdit,
  stageCaptionEdit,
} from '../src/viewmodel.js';
import type { VideoEventsResponse } from '../src/types.js';

function fixtureResponse(): VideoEventsResponse {
  return {
    video_id: 'vid0',
    duration_s: 30.0,
    review_state: 'unreviewed',
    visual_events: [
      { event_id: 'v0', interval: [0.0, 10.0], caption: 'scene one', asr_text: null },
      { event_id: 'v1', interval: [10.0, 20.0], caption: 'scene two', asr_text: null },
    ],
    audio_events: [
      { event_id: 'a0', interval: [2.0, 8.0], caption: 'music', asr_text: '' },
      { event_id: 'a1', interval: [12.0, 18.0], caption: 'cheering', asr_text: '' },
    ],
    omni_events: [
      {
        event_id: 'vid0:o0',
        interval: [0.0, 10.0],
        caption: 'first event',
        correlation_tags: ['synchronicity'],
        has_temporal_dynamics: false,
        visual_event_ids: ['v0'],
        audio_event_ids: ['a0'],
        state: 'pending',
        flag_reason: null,
        revision: 0,
      },
      {
        event_id: 'vid0:o1',
        interval: [10.0, 20.0],
        caption: 'second event',
        correlation_tags: [],
        has_temporal_dynamics: true,
        visual_event_ids: ['v1'],
        audio_event_ids: ['a1'],
        state: 'pending',
        flag_reason: null,
        revision: 2,
      },
    ],
  };
}

describe('fromEventsResponse', () => {
  it('mirrors the server payload and selects the first event', () => {
    const vm = fromEventsResponse(fixtureResponse());
    expect(vm.server).toEqual(fixtureResponse());
    expect(vm.selectedId).toBe('vid0:o0');
    expect(vm.dirty).toBeNull();
  });

  it('keeps the previous selection across a refetch', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = selectNext(vm);
    const again = fromEventsResponse(fixtureResponse(), vm);
    expect(again.selectedId).toBe('vid0:o1');
  });
});

describe('editing', () => {
  it('staged boundary edits snap to 0.1 s and stay local', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = stageBoundaryEdit(vm, 0.04, 10.26);
    expect(vm.dirty?.interval).toEqual([0.0, 10.3]);
    // server mirror untouched
    expect(vm.server.omni_events[0]!.interval).toEqual([0.0, 10.0]);
  });

  it('nudging moves one edge by grid steps', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = nudgeBoundary(vm, 'end', 3);
    expect(vm.dirty?.interval).toEqual([0.0, 10.3]);
    vm = nudgeBoundary(vm, 'start', 1);
    expect(vm.dirty?.interval?.[0]).toBeCloseTo(0.1, 10);
  });

  it('rejects inverted intervals', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = stageBoundaryEdit(vm, 9.0, 4.0);
    expect(vm.dirty).toBeNull();
  });

  it('moving selection discards the dirty edit', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = stageCaptionEdit(vm, 'draft');
    vm = selectNext(vm);
    expect(vm.dirty).toBeNull();
  });

  it('discardEdit clears without submitting', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = stageBoundaryEdit(vm, 1.0, 9.0);
    vm = discardEdit(vm);
    expect(vm.dirty).toBeNull();
  });
});

describe('correctionPayload', () => {
  it('carries the base revision of the edited event', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = selectNext(vm); // vid0:o1, revision 2
    vm = stageCaptionEdit(vm, 'a better caption');
    const body = correctionPayload(vm, 'alice');
    expect(body).toEqual({ base_revision: 2, author: 'alice', caption: 'a better caption' });
  });

  it('is null when nothing actually changed', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = stageCaptionEdit(vm, 'first event'); // same as server value
    expect(correctionPayload(vm, 'alice')).toBeNull();
    vm = stageBoundaryEdit(vm, 0.0, 10.0); // same interval
    expect(correctionPayload(vm, 'alice')).toBeNull();
  });

  it('includes the snapped interval when boundaries moved', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = stageBoundaryEdit(vm, 0.0, 11.02);
    expect(correctionPayload(vm, 'bob')).toEqual({
      base_revision: 0,
      author: 'bob',
      interval: [0.0, 11.0],
    });
  });
});

describe('buildLanes', () => {
  it('positions events proportionally to time', () => {
    const lanes = buildLanes(fromEventsResponse(fixtureResponse()));
    const byName = new Map(lanes.map((l) => [l.name, l]));
    const visual = byName.get('visual')!;
    expect(visual.blocks[0]!.left).toBeCloseTo(0, 10);
    expect(visual.blocks[0]!.width).toBeCloseTo(10 / 30, 10);
    const audio = byName.get('audio')!;
    expect(audio.blocks[1]!.left).toBeCloseTo(12 / 30, 10);
    expect(audio.blocks[1]!.width).toBeCloseTo(6 / 30, 10);
  });

  it('omni blocks visually contain their audio constituents', () => {
    const lanes = buildLanes(fromEventsResponse(fixtureResponse()));
    const omni = lanes.find((l) => l.name === 'omni')!;
    const first = omni.blocks[0]!;
    expect(first.contained).toHaveLength(1);
    const child = first.contained![0]!;
    // audio a0 [2, 8) inside omni [0, 10)
    expect(child.left).toBeCloseTo(0.2, 10);
    expect(child.width).toBeCloseTo(0.6, 10);
    // child fits inside the parent block
    expect(child.left).toBeGreaterThanOrEqual(0);
    expect(child.left + child.width).toBeLessThanOrEqual(1 + 1e-9);
  });

  it('renders the staged interval for the edited event', () => {
    let vm = fromEventsResponse(fixtureResponse());
    vm = stageBoundaryEdit(vm, 0.0, 12.0);
    const omni = buildLanes(vm).find((l) => l.name === 'omni')!;
    expect(omni.blocks[0]!.width).toBeCloseTo(12 / 30, 10);
  });
});
