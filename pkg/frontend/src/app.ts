// Review app: keyboard-first flow over the reviewd API.
//
//   j / k        next / previous omni event
//   f            flag the selected event (prompts for a reason)
//   a            approve the selected event
//   e            edit the caption
//   [ / ]        move start edge -/+ one 0.1 s step   (shift: end edge)
//   Enter        submit the staged correction
//   Escape       discard the staged edit
//
// The view model always mirrors the last server response; staged edits are
// local until Enter, and any successful mutation triggers a refetch so the
// page never drifts from server truth. A background poll picks up other
// annotators' changes on the open video.

import { ApiError, ConflictError, ReviewApi, ValidationRejection } from './api.js';
import { renderTimeline } from './timeline.js';
import {
  buildLanes,
  correctionPayload,
  discardEdit,
  fromEventsResponse,
  nudgeBoundary,
  selectNext,
  selectedEvent,
  stageCaptionEdit,
  type TimelineViewModel,
} from './viewmodel.js';

const POLL_INTERVAL_MS = 3000;

export class ReviewApp {
  private vm: TimelineViewModel | null = null;
  private pollTimer: number | null = null;

  constructor(
    private readonly api: ReviewApi,
    private readonly root: HTMLElement,
    private readonly author: string = 'annotator',
  ) {}

  async openVideo(videoId: string): Promise<void> {
    try {
      const response = await this.api.getEvents(videoId);
      this.vm = fromEventsResponse(response, this.vm ?? undefined);
      this.hideBanner();
      this.render();
      this.startPolling();
    } catch (error) {
      this.showBanner(`Failed to load ${videoId}: ${String(error)}`, () => this.openVideo(videoId));
    }
  }

  private startPolling(): void {
    if (this.pollTimer !== null) window.clearInterval(this.pollTimer);
    this.pollTimer = window.setInterval(() => void this.poll(), POLL_INTERVAL_MS);
  }

  private async poll(): Promise<void> {
    if (!this.vm || this.vm.dirty) return; // never clobber a staged edit silently
    try {
      const fresh = await this.api.getEvents(this.vm.videoId);
      const changed = fresh.omni_events.some((e) => {
        const current = this.vm!.server.omni_events.find((c) => c.event_id === e.event_id);
        return !current || current.revision !== e.revision;
      });
      if (changed) {
        this.vm = fromEventsResponse(fresh, this.vm);
        this.render();
      }
    } catch {
      // transient poll failures are ignored; explicit actions surface errors
    }
  }

  private async refetch(): Promise<void> {
    if (!this.vm) return;
    const fresh = await this.api.getEvents(this.vm.videoId);
    this.vm = fromEventsResponse(fresh, this.vm);
    this.render();
  }

  handleKey(event: KeyboardEvent): void {
    if (!this.vm) return;
    const editing = (event.target as HTMLElement | null)?.tagName === 'TEXTAREA';
    if (editing && event.key !== 'Escape' && event.key !== 'Enter') return;
    switch (event.key) {
      case 'j':
        this.vm = selectNext(this.vm, 1);
        break;
      case 'k':
        this.vm = selectNext(this.vm, -1);
        break;
      case 'f':
        void this.flagSelected();
        return;
      case 'a':
        void this.approveSelected();
        return;
      case 'e':
        this.openCaptionEditor();
        return;
      case '[':
        this.vm = nudgeBoundary(this.vm, event.shiftKey ? 'end' : 'start', -1);
        break;
      case ']':
        this.vm = nudgeBoundary(this.vm, event.shiftKey ? 'end' : 'start', +1);
        break;
      case 'Enter':
        void this.submitEdit();
        return;
      case 'Escape':
        this.vm = discardEdit(this.vm);
        break;
      default:
        return;
    }
    event.preventDefault();
    this.render();
  }

  private async flagSelected(): Promise<void> {
    const event = this.vm && selectedEvent(this.vm);
    if (!event) return;
    const reason = window.prompt('Flag reason:', 'inaccurate boundary or caption');
    if (!reason) return;
    await this.mutate(() => this.api.flag(event.event_id, reason, event.revision));
  }

  private async approveSelected(): Promise<void> {
    const event = this.vm && selectedEvent(this.vm);
    if (!event) return;
    await this.mutate(() => this.api.approve(event.event_id, event.revision));
  }

  private openCaptionEditor(): void {
    const event = this.vm && selectedEvent(this.vm);
    if (!event || !this.vm) return;
    const caption = window.prompt('Caption:', event.caption ?? '');
    if (caption === null) return;
    this.vm = stageCaptionEdit(this.vm, caption);
    this.render();
  }

  private async submitEdit(): Promise<void> {
    if (!this.vm) return;
    const event = selectedEvent(this.vm);
    const body = correctionPayload(this.vm, this.author);
    if (!event || !body) return;
    await this.mutate(() => this.api.correct(event.event_id, body));
  }

  private async mutate(action: () => Promise<unknown>): Promise<void> {
    try {
      await action();
      await this.refetch();
    } catch (error) {
      if (error instanceof ConflictError) {
        // someone else got there first: show the diff, never overwrite silently
        const mine = this.vm?.dirty ?? null;
        await this.refetch();
        const fresh = this.vm && selectedEvent(this.vm);
        this.showBanner(
          `Conflict: the event changed on the server (now revision ${fresh?.revision}). ` +
            `Server: [${fresh?.interval.join(', ')}] "${fresh?.caption ?? ''}". ` +
            (mine?.interval ? `Your boundaries: [${mine.interval.join(', ')}]. ` : '') +
            (mine?.caption !== undefined ? `Your caption: "${mine.caption}". ` : '') +
            'Re-apply your edit if still needed.',
        );
      } else if (error instanceof ValidationRejection) {
        this.showBanner(`Rejected (${error.invariant}): ${error.message}`);
      } else if (error instanceof ApiError) {
        this.showBanner(`Request failed: ${error.message}`);
      } else {
        this.showBanner(`Request failed: ${String(error)}`);
      }
    }
  }

  private showBanner(message: string, retry?: () => void): void {
    const banner = this.root.querySelector('.banner') as HTMLElement;
    banner.textContent = message;
    banner.hidden = false;
    if (retry) {
      const button = document.createElement('button');
      button.textContent = 'Retry';
      button.addEventListener('click', retry);
      banner.appendChild(button);
    }
  }

  private hideBanner(): void {
    const banner = this.root.querySelector('.banner') as HTMLElement;
    banner.hidden = true;
    banner.textContent = '';
  }

  private render(): void {
    if (!this.vm) return;
    const timeline = this.root.querySelector('.timeline') as HTMLElement;
    renderTimeline(timeline, buildLanes(this.vm), (eventId) => {
      if (!this.vm) return;
      this.vm = { ...this.vm, selectedId: eventId, dirty: null };
      this.render();
    });

    const detail = this.root.querySelector('.detail') as HTMLElement;
    const event = selectedEvent(this.vm);
    if (!event) {
      detail.textContent = '';
      return;
    }
    const interval = this.vm.dirty?.interval ?? event.interval;
    const caption = this.vm.dirty?.caption ?? event.caption ?? '';
    detail.innerHTML = '';
    const heading = document.createElement('h3');
    heading.textContent = `${event.event_id}  [${interval[0].toFixed(1)}, ${interval[1].toFixed(1)})  rev ${event.revision}  ${event.state}${this.vm.dirty ? '  (edited, unsubmitted)' : ''}`;
    const text = document.createElement('p');
    text.textContent = caption;
    const tags = document.createElement('p');
    tags.className = 'tags';
    tags.textContent = event.correlation_tags.join(', ');
    detail.append(heading, text, tags);

    // playback is delegated to the server's static media mount, when present
    const audioUrl = this.vm.server.media?.audio_url;
    if (audioUrl) {
      const audio = document.createElement('audio');
      audio.controls = true;
      audio.src = `${this.api.baseUrl}${audioUrl}#t=${interval[0]},${interval[1]}`;
      detail.appendChild(audio);
    }
  }
}

export async function boot(baseUrl: string, rootId = 'app'): Promise<ReviewApp> {
  const root = document.getElementById(rootId);
  if (!root) throw new Error(`missing #${rootId}`);
  root.innerHTML = `
    <div class="banner" hidden></div>
    <div class="video-list"></div>
    <div class="timeline"></div>
    <div class="detail"></div>
  `;
  const api = new ReviewApi(baseUrl);
  const app = new ReviewApp(api, root);
  document.addEventListener('keydown', (event) => app.handleKey(event));

  const list = root.querySelector('.video-list') as HTMLElement;
  const videos = await api.listVideos();
  for (const video of videos.videos) {
    const button = document.createElement('button');
    button.textContent = `${video.video_id} (${video.n_omni_events} events, ${video.review_state})`;
    button.addEventListener('click', () => void app.openVideo(video.video_id));
    list.appendChild(button);
  }
  if (videos.videos[0]) await app.openVideo(videos.videos[0].video_id);
  return app;
}
