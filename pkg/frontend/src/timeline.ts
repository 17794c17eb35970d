// DOM application of the lane models. All geometry comes from the pure
// layout/viewmodel modules; this file only writes styles and attributes.

import type { LaneModel } from './layout.js';

const pct = (fraction: number) => `${(fraction * 100).toFixed(4)}%`;

export function renderTimeline(
  container: HTMLElement,
  lanes: LaneModel[],
  onSelect: (eventId: string) => void,
): void {
  container.textContent = '';
  if (lanes.every((lane) => lane.blocks.length === 0)) {
    const empty = document.createElement('div');
    empty.className = 'empty-state';
    empty.textContent = 'No events in this video.';
    container.appendChild(empty);
    return;
  }
  for (const lane of lanes) {
    const row = document.createElement('div');
    row.className = `lane lane-${lane.name}`;
    const label = document.createElement('span');
    label.className = 'lane-label';
    label.textContent = lane.name;
    row.appendChild(label);
    const track = document.createElement('div');
    track.className = 'lane-track';
    for (const block of lane.blocks) {
      const el = document.createElement('div');
      el.className = 'event-block';
      if (block.selected) el.classList.add('selected');
      if (block.state) el.dataset.state = block.state;
      el.dataset.eventId = block.eventId;
      el.style.left = pct(block.left);
      el.style.width = pct(block.width);
      el.title = `${block.startS.toFixed(1)}s – ${block.endS.toFixed(1)}s  ${block.label}`;
      if (lane.name === 'omni') {
        el.addEventListener('click', () => onSelect(block.eventId));
        for (const child of block.contained ?? []) {
          const inner = document.createElement('div');
          inner.className = 'contained-audio';
          inner.style.left = pct(child.left);
          inner.style.width = pct(child.width);
          el.appendChild(inner);
        }
      }
      track.appendChild(el);
    }
    row.appendChild(track);
    container.appendChild(row);
  }
}
