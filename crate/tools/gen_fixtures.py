#!/usr/bin/env python3
"""Regenerates the fixture corpus under fixtures/.

The output is deterministic. Run from the repository root:

    python3 tools/gen_fixtures.py

Policy presets are not written here; they come from the CLI
(`surface-ledger policy preset ...`) so the canonical encoding has one owner.
"""

import csv
import json
import os
import random
import re

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")
TOTAL_ELOC = 75650
POPULATION = 10000

# name, abbrev, sites using, break cell, agree cell, cves, high/severe, eloc %, attack papers
MEASURED = [
    ("WebGL", "WEBGL", 852, "<1%", "93%", 31, 22, 27.43, 4),
    ("HTML: Web Workers", "H-WW", 856, "0%", "100%", 16, 9, 1.63, 2),
    ("WebRTC", "WRTC", 24, "0%", "93%", 15, 4, 2.48, 2),
    ("HTML: The canvas element", "H-C", 6935, "0%", "100%", 14, 6, 5.03, 7),
    ("Scalable Vector Graphics", "SVG", 1516, "0%", "98%", 13, 10, 7.86, 0),
    ("Web Audio API", "WEBA", 148, "0%", "100%", 10, 5, 5.79, 2),
    ("XMLHttpRequest", "AJAX", 7806, "32%", "82%", 11, 4, 1.73, 0),
    ("HTML", "HTML", 8939, "40%", "85%", 6, 2, 0.89, 2),
    ("HTML 5", "HTML5", 6882, "4%", "97%", 5, 2, 5.72, 0),
    ("Service Workers", "SW", 0, "0%", "-", 5, 0, 2.84, 3),
    ("HTML: Web Sockets", "H-WS", 514, "0%", "95%", 5, 3, 0.67, 0),
    ("HTML: History Interface", "H-HI", 1481, "1%", "96%", 5, 1, 1.04, 0),
    ("Indexed Database API", "IDB", 288, "<1%", "100%", 4, 2, 4.73, 2),
    ("Web Cryptography API", "WCR", 7048, "4%", "90%", 4, 3, 0.52, 0),
    ("Media Capture and Streams", "MCS", 49, "0%", "95%", 4, 3, 1.08, 1),
    ("DOM Level 2: HTML", "DOM2-H", 8956, "13%", "89%", 3, 1, 2.09, 0),
    ("DOM Level 2: Traversal and Range", "DOM2-T", 4406, "0%", "100%", 3, 2, 0.04, 0),
    ("HTML 5.1", "HTML51", 2, "0%", "100%", 3, 1, 1.18, 0),
    ("Resource Timing", "RT", 433, "0%", "98%", 3, 0, 0.10, 0),
    ("Fullscreen API", "FULL", 229, "0%", "95%", 3, 1, 0.12, 0),
    ("Beacon", "BE", 2302, "0%", "100%", 2, 0, 0.23, 0),
    ("DOM Level 1", "DOM1", 9113, "63%", "96%", 2, 2, 1.66, 0),
    ("DOM Parsing and Serialization", "DOM-PS", 2814, "0%", "83%", 2, 1, 0.31, 0),
    ("DOM Level 2: Events", "DOM2-E", 9038, "34%", "96%", 2, 0, 0.35, 0),
    ("DOM Level 2: Style", "DOM2-S", 8773, "31%", "93%", 2, 1, 0.69, 0),
    ("Fetch", "F", 63, "<1%", "90%", 2, 0, 1.14, 3),
    ("CSS Object Model", "CSS-OM", 8094, "5%", "94%", 1, 0, 0.17, 1),
    ("DOM", "DOM", 9050, "36%", "94%", 1, 1, 1.29, 0),
    ("HTML: Plugins", "H-P", 92, "0%", "100%", 1, 1, 0.98, 2),
    ("File API", "FA", 1672, "0%", "83%", 1, 0, 1.46, 0),
    ("Gamepad", "GP", 1, "0%", "71%", 1, 1, 0.07, 0),
    ("Geolocation API", "GEO", 153, "0%", "96%", 1, 0, 0.26, 2),
    ("High Resolution Time Level 2", "HRT", 5665, "0%", "100%", 1, 0, 0.02, 8),
    ("HTML: Channel Messaging", "H-CM", 4964, "0%", "0.025", 1, 0, 0.40, 2),
    ("Navigation Timing", "NT", 64, "0%", "98%", 1, 0, 0.09, 0),
    ("Web Notifications", "WN", 15, "0%", "100%", 1, 1, 0.82, 0),
    ("Page Visibility (Second Edition)", "PV", 0, "0%", "-", 1, 1, 0.02, 0),
    ("UI Events", "UIE", 1030, "<1%", "100%", 1, 0, 0.47, 0),
    ("Vibration API", "V", 1, "0%", "100%", 1, 1, 0.08, 0),
    ("Console API", "CO", 3, "0%", "100%", 0, 0, 0.59, 1),
    ("CSSOM View Module", "CSS-VM", 4538, "0%", "100%", 0, 0, 2.85, 1),
    ("Battery Status API", "BA", 2317, "0%", "100%", 0, 0, 0.15, 4),
    ("CSS Conditional Rules Module Level 3", "CSS-CR", 416, "0%", "100%", 0, 0, 0.16, 0),
    ("CSS Font Loading Module Level 3", "CSS-FO", 2287, "0%", "98%", 0, 0, 1.24, 2),
    ("DeviceOrientation Event", "DO", 0, "0%", "-", 0, 0, 0.06, 2),
    ("DOM Level 2: Core", "DOM2-C", 8896, "89%", "97%", 0, 0, 0.29, 0),
    ("DOM Level 3: Core", "DOM3-C", 8411, "4%", "96%", 0, 0, 0.25, 0),
    ("DOM Level 3: XPath", "DOM3-X", 364, "1%", "97%", 0, 0, 0.16, 0),
    ("Encrypted Media Extensions", "EME", 9, "0%", "100%", 0, 0, 1.91, 0),
    ("HTML: Web Storage", "H-WB", 7806, "0%", "83%", 0, 0, 0.55, 3),
    ("Media Source Extensions", "MSE", 1240, "0%", "95%", 0, 0, 1.97, 0),
    ("Selectors API Level 1", "SLC", 8611, "15%", "89%", 0, 0, 0.00, 0),
    ("Script-based animation timing control", "TC", 3437, "0%", "100%", 0, 0, 0.08, 1),
    ("Ambient Light Sensor API", "ALS", 18, "0%", "89%", 0, 0, 0.00, 2),
]

# Standards with 0% break, no CVEs and under 1% ELoC. The first block appears in
# the hardened configuration listing; the rest are placeholders completing the
# 74-standard partition.
QUIET = [
    ("Performance Timeline Level 2", "PT2", 412),
    ("Performance Timeline", "PT", 380),
    ("execCommand", "EC", 1204),
    ("HTML: Broadcasting", "H-B", 2),
    ("Pointer Lock", "PL", 4),
    ("Proximity Events", "PE", 0),
    ("Selection API", "SEL", 1587),
    ("The Screen Orientation API", "SO", 11),
    ("URL", "URL", 642),
    ("User Timing Level 2", "UTL", 157),
    ("W3C DOM4", "DOM4", 1421),
    ("WebVTT", "WEBVTT", 3),
    ("Encoding", "E", 118),
    ("MediaStream Recording", "MSR", 2),
    ("Touch Events", "TE", 610),
    ("Push API", "PUSH", 0),
    ("Web Speech API", "WSP", 1),
    ("Web Animations", "WANIM", 7),
    ("Shadow DOM", "SD", 1),
    ("Clipboard API and events", "CLIP", 26),
]

CONSERVATIVE = ["BE", "DOM-PS", "FULL", "HRT", "H-WS", "H-CM", "H-WW", "IDB", "PT2",
                "RT", "SVG", "UIE", "WEBA", "WEBGL"]
AGGRESSIVE_EXTRA = ["ALS", "BA", "CSS-CR", "CSS-FO", "CSS-VM", "DOM2-T", "EME", "EC",
                    "F", "FA", "GP", "GEO", "H-B", "H-P", "H-HI", "H-WB", "MCS", "MSE",
                    "NT", "PT", "PL", "PE", "SEL", "SO", "TC", "URL", "UTL", "DOM4",
                    "WN", "WRTC"]
AGGRESSIVE = CONSERVATIVE + AGGRESSIVE_EXTRA
CONSERVATIVE_ELOC = 37848
AGGRESSIVE_ELOC = 53518

IDL = {
    "WEBGL": """[Exposed=Window]
interface WebGLRenderingContext {
  readonly attribute HTMLCanvasElement canvas;
  readonly attribute long drawingBufferWidth;
  readonly attribute long drawingBufferHeight;
  void bufferData(unsigned long target, BufferSource data, unsigned long usage);
  void drawArrays(unsigned long mode, long first, long count);
  WebGLShader? createShader(unsigned long type);
  void compileShader(WebGLShader shader);
  void texImage2D(unsigned long target, long level, ArrayBufferView? pixels);
};
""",
    "H-WW": """interface Worker : EventTarget {
  constructor(DOMString scriptURL);
  void postMessage(any message);
  void terminate();
  attribute EventHandler onmessage;
};

interface WorkerGlobalScope : EventTarget {
  readonly attribute WorkerLocation location;
  void importScripts(DOMString... urls);
};
""",
    "WRTC": """interface RTCPeerConnection : EventTarget {
  constructor(optional RTCConfiguration configuration);
  Promise<RTCSessionDescriptionInit> createOffer();
  Promise<void> setLocalDescription(RTCSessionDescriptionInit description);
  Promise<void> addIceCandidate(RTCIceCandidateInit candidate);
  readonly attribute RTCSessionDescription? localDescription;
  RTCDataChannel createDataChannel(DOMString label);
};
""",
    "H-C": """interface HTMLCanvasElement : HTMLElement {
  attribute unsigned long width;
  attribute unsigned long height;
  RenderingContext? getContext(DOMString contextId, any... arguments);
  DOMString toDataURL(optional DOMString type);
};

interface CanvasRenderingContext2D {
  attribute any fillStyle;
  void fillRect(double x, double y, double w, double h);
  ImageData getImageData(long sx, long sy, long sw, long sh);
  void drawImage(CanvasImageSource image, double dx, double dy);
};
""",
    "SVG": """interface SVGNumberList {
  readonly attribute unsigned long numberOfItems;
  SVGNumber getItem(unsigned long index);
  SVGNumber appendItem(SVGNumber newItem);
};

interface SVGPointList {
  readonly attribute unsigned long numberOfItems;
  SVGPoint appendItem(SVGPoint newItem);
};

interface SVGFilterElement : SVGElement {
  readonly attribute SVGAnimatedLength width;
  void apply();
};

interface SVGAnimationElement : SVGElement {
  void beginElement();
  void endElement();
};
""",
    "WEBA": """interface AudioContext : EventTarget {
  constructor();
  readonly attribute double currentTime;
  GainNode createGain();
  OscillatorNode createOscillator();
  AnalyserNode createAnalyser();
};

interface GainNode : AudioNode {
  readonly attribute AudioParam gain;
  attribute long channelCount;
  void connect(AudioNode destination);
};
""",
    "AJAX": """interface XMLHttpRequest : XMLHttpRequestEventTarget {
  constructor();
  void open(ByteString method, USVString url);
  void send(optional any body);
  readonly attribute USVString responseText;
  attribute boolean withCredentials;
  void setRequestHeader(ByteString name, ByteString value);
};
""",
    "HTML": """interface HTMLFormElement : HTMLElement {
  attribute USVString action;
  void submit();
  void reset();
};

interface Location {
  void assign(USVString url);
  void reload();
  attribute USVString hash;
};
""",
    "HTML5": """interface HTMLMediaElement : HTMLElement {
  attribute double currentTime;
  Promise<void> play();
  void pause();
  readonly attribute boolean paused;
};

interface HTMLVideoElement : HTMLMediaElement {
  readonly attribute unsigned long videoWidth;
};
""",
    "SW": """interface ServiceWorkerContainer : EventTarget {
  readonly attribute ServiceWorker? controller;
  Promise<ServiceWorkerRegistration> register(USVString scriptURL);
  Promise<any> getRegistration(optional USVString clientURL);
};
""",
    "H-WS": """interface WebSocket : EventTarget {
  constructor(USVString url, optional any protocols);
  readonly attribute unsigned short readyState;
  void send(USVString data);
  void close(optional unsigned short code);
};
""",
    "H-HI": """interface History {
  readonly attribute unsigned long length;
  void pushState(any data, DOMString title, optional USVString? url);
  void replaceState(any data, DOMString title, optional USVString? url);
  void back();
};
""",
    "IDB": """interface IDBFactory {
  IDBOpenDBRequest open(DOMString name, optional unsigned long long version);
  IDBOpenDBRequest deleteDatabase(DOMString name);
};

interface IDBObjectStore {
  IDBRequest put(any value, optional any key);
  IDBRequest get(any query);
};
""",
    "WCR": """interface SubtleCrypto {
  Promise<any> digest(AlgorithmIdentifier algorithm, BufferSource data);
  Promise<any> encrypt(AlgorithmIdentifier algorithm, CryptoKey key, BufferSource data);
  Promise<any> decrypt(AlgorithmIdentifier algorithm, CryptoKey key, BufferSource data);
};

interface Crypto {
  readonly attribute SubtleCrypto subtle;
  ArrayBufferView getRandomValues(ArrayBufferView array);
};
""",
    "MCS": """interface MediaDevices : EventTarget {
  Promise<MediaStream> getUserMedia(optional MediaStreamConstraints constraints);
  Promise<sequence<MediaDeviceInfo>> enumerateDevices();
};

interface MediaStream : EventTarget {
  sequence<MediaStreamTrack> getTracks();
};
""",
    "DOM2-H": """interface HTMLTableElement : HTMLElement {
  HTMLElement insertRow(optional long index);
  void deleteRow(long index);
};

interface HTMLOptionsCollection : HTMLCollection {
  void add(HTMLOptionElement element);
  void remove(long index);
};
""",
    "DOM2-T": """interface TreeWalker {
  attribute Node currentNode;
  Node? nextNode();
  Node? parentNode();
};

interface Range {
  void setStart(Node node, unsigned long offset);
  void collapse(optional boolean toStart);
};
""",
    "HTML51": """interface HTMLDetailsElement : HTMLElement {
  attribute boolean open;
};

interface HTMLDialogElement : HTMLElement {
  void showModal();
};
""",
    "RT": """interface PerformanceResourceTiming : PerformanceEntry {
  readonly attribute DOMHighResTimeStamp responseEnd;
  readonly attribute DOMString initiatorType;
};
""",
    "FULL": """interface DocumentFullscreen {
  readonly attribute boolean fullscreenEnabled;
  Promise<void> exitFullscreen();
};

interface ElementFullscreen {
  Promise<void> requestFullscreen();
};
""",
    "BE": """interface NavigatorBeacon {
  boolean sendBeacon(USVString url, optional BodyInit? data);
};
""",
    "DOM1": """interface Node : EventTarget {
  readonly attribute DOMString nodeName;
  attribute DOMString? nodeValue;
  Node appendChild(Node node);
  Node removeChild(Node child);
};

interface Document : Node {
  HTMLCollection getElementsByTagName(DOMString qualifiedName);
  Element createElement(DOMString localName);
};

interface Element : Node {
  void setAttribute(DOMString qualifiedName, DOMString value);
  DOMString? getAttribute(DOMString qualifiedName);
};
""",
    "DOM-PS": """interface DOMParser {
  constructor();
  Document parseFromString(DOMString str, SupportedType type);
};

interface XMLSerializer {
  constructor();
  DOMString serializeToString(Node root);
};
""",
    "DOM2-E": """interface EventTarget {
  void addEventListener(DOMString type, EventListener? callback);
  void removeEventListener(DOMString type, EventListener? callback);
  boolean dispatchEvent(Event event);
};
""",
    "DOM2-S": """interface CSSStyleDeclaration {
  attribute DOMString cssText;
  DOMString getPropertyValue(DOMString property);
  void setProperty(DOMString property, DOMString value);
};
""",
    "F": """interface Request {
  constructor(RequestInfo input, optional RequestInit init);
  Request clone();
};

interface Response {
  Promise<any> json();
  Promise<USVString> text();
};

interface GlobalFetch {
  Promise<Response> fetch(RequestInfo input, optional RequestInit init);
};
""",
    "CSS-OM": """interface CSSStyleSheet : StyleSheet {
  unsigned long insertRule(CSSOMString rule, optional unsigned long index);
  void deleteRule(unsigned long index);
};

interface StyleSheet {
  readonly attribute USVString? href;
};
""",
    "DOM": """interface MutationObserver {
  constructor(MutationCallback callback);
  void observe(Node target, optional MutationObserverInit options);
  void disconnect();
};
""",
    "H-P": """interface PluginArray {
  readonly attribute unsigned long length;
  void refresh();
  Plugin? item(unsigned long index);
};
""",
    "FA": """interface FileReader : EventTarget {
  constructor();
  readonly attribute any result;
  void readAsText(Blob blob, optional DOMString encoding);
  void readAsDataURL(Blob blob);
};
""",
    "GP": """interface Gamepad {
  readonly attribute DOMString id;
  readonly attribute unsigned long index;
};

interface NavigatorGamepad {
  sequence<Gamepad?> getGamepads();
};
""",
    "GEO": """interface Geolocation {
  void getCurrentPosition(PositionCallback successCallback);
  long watchPosition(PositionCallback successCallback);
  void clearWatch(long watchId);
};
""",
    "HRT": """interface Performance : EventTarget {
  DOMHighResTimeStamp now();
  readonly attribute DOMHighResTimeStamp timeOrigin;
};
""",
    "H-CM": """interface MessageChannel {
  constructor();
  readonly attribute MessagePort port1;
  readonly attribute MessagePort port2;
};

interface MessagePort : EventTarget {
  void postMessage(any message);
  void start();
  void close();
};
""",
    "NT": """interface PerformanceTiming {
  readonly attribute unsigned long long navigationStart;
  readonly attribute unsigned long long loadEventEnd;
};
""",
    "WN": """interface Notification : EventTarget {
  constructor(DOMString title, optional NotificationOptions options);
  readonly attribute DOMString title;
  void close();
  Promise<NotificationPermission> requestPermission();
};
""",
    "PV": """interface DocumentVisibility {
  readonly attribute boolean hidden;
  readonly attribute VisibilityState visibilityState;
};
""",
    "UIE": """interface UIEvent : Event {
  readonly attribute Window? view;
  readonly attribute long detail;
};

interface KeyboardEvent : UIEvent {
  boolean getModifierState(DOMString keyArg);
};
""",
    "V": """interface NavigatorVibration {
  boolean vibrate(VibratePattern pattern);
};
""",
    "CO": """[Exposed=(Window,Worker)]
interface Console {
  void log(any... data);
  void warn(any... data);
};

partial interface Console {
  void timeline(optional DOMString label);
  void timelineEnd(optional DOMString label);
};
""",
    "CSS-VM": """interface Screen {
  readonly attribute long availWidth;
  readonly attribute long width;
};

interface MediaQueryList : EventTarget {
  readonly attribute boolean matches;
  void addListener(EventListener? listener);
};
""",
    "BA": """interface BatteryManager : EventTarget {
  readonly attribute boolean charging;
  readonly attribute unrestricted double chargingTime;
  readonly attribute unrestricted double dischargingTime;
  readonly attribute double level;
};

interface NavigatorBattery {
  Promise<BatteryManager> getBattery();
};
""",
    "CSS-CR": """interface CSS {
  boolean supports(CSSOMString property, CSSOMString value);
};

interface CSSSupportsRule : CSSConditionRule {
  readonly attribute CSSOMString conditionText;
};
""",
    "CSS-FO": """interface FontFace {
  constructor(CSSOMString family, any source);
  readonly attribute FontFaceLoadStatus status;
  Promise<FontFace> load();
};

interface FontFaceSet : EventTarget {
  boolean check(CSSOMString font);
  Promise<any> load(CSSOMString font);
};
""",
    "DO": """interface DeviceOrientationEvent : Event {
  readonly attribute double? alpha;
  readonly attribute double? beta;
  readonly attribute double? gamma;
};
""",
    "DOM2-C": """interface NamedNodeMap {
  Attr? getNamedItemNS(DOMString? namespace, DOMString localName);
  Attr? setNamedItemNS(Attr attr);
};

interface DOMImplementation {
  XMLDocument createDocument(DOMString? namespace, DOMString qualifiedName);
  boolean hasFeature();
};
""",
    "DOM3-C": """interface NodeComparison {
  attribute DOMString? textContent;
  boolean isEqualNode(Node? otherNode);
  unsigned short compareDocumentPosition(Node other);
};
""",
    "DOM3-X": """interface XPathEvaluator {
  constructor();
  XPathResult evaluate(DOMString expression, Node contextNode);
  XPathExpression createExpression(DOMString expression);
};

interface XPathResult {
  Node? iterateNext();
};
""",
    "EME": """interface MediaKeys {
  MediaKeySession createSession(optional MediaKeySessionType sessionType);
};

interface MediaKeySession : EventTarget {
  Promise<void> generateRequest(DOMString initDataType, BufferSource initData);
  Promise<void> close();
};
""",
    "H-WB": """interface Storage {
  readonly attribute unsigned long length;
  DOMString? getItem(DOMString key);
  void setItem(DOMString key, DOMString value);
  void removeItem(DOMString key);
  void clear();
};
""",
    "MSE": """interface MediaSource : EventTarget {
  constructor();
  SourceBuffer addSourceBuffer(DOMString type);
  void endOfStream();
};

interface SourceBuffer : EventTarget {
  void appendBuffer(BufferSource data);
};
""",
    "SLC": """interface NodeSelector {
  Element? querySelector(DOMString selectors);
  NodeList querySelectorAll(DOMString selectors);
};
""",
    "TC": """interface AnimationFrameProvider {
  unsigned long requestAnimationFrame(FrameRequestCallback callback);
  void cancelAnimationFrame(unsigned long handle);
};
""",
    "ALS": """interface DeviceLightEvent : Event {
  readonly attribute unrestricted double value;
};
""",
    "PT2": """interface PerformanceObserver {
  constructor(PerformanceObserverCallback callback);
  void observe(optional PerformanceObserverInit options);
  void disconnect();
};
""",
    "PT": """interface PerformanceEntry {
  readonly attribute DOMString name;
  readonly attribute DOMString entryType;
  readonly attribute DOMHighResTimeStamp startTime;
  readonly attribute DOMHighResTimeStamp duration;
};
""",
    "EC": """interface DocumentEditing {
  boolean execCommand(DOMString commandId, optional boolean showUI);
  boolean queryCommandEnabled(DOMString commandId);
};
""",
    "H-B": """interface BroadcastChannel : EventTarget {
  constructor(DOMString name);
  void postMessage(any message);
  void close();
};
""",
    "PL": """interface ElementPointerLock {
  void requestPointerLock();
};

interface DocumentPointerLock {
  readonly attribute Element? pointerLockElement;
  void exitPointerLock();
};
""",
    "PE": """interface DeviceProximityEvent : Event {
  readonly attribute unrestricted double value;
  readonly attribute unrestricted double min;
  readonly attribute unrestricted double max;
};

interface UserProximityEvent : Event {
  readonly attribute boolean near;
};
""",
    "SEL": """interface Selection {
  readonly attribute unsigned long rangeCount;
  void addRange(Range range);
  void removeAllRanges();
  void collapse(Node? node, optional unsigned long offset);
};
""",
    "SO": """interface ScreenOrientation : EventTarget {
  readonly attribute OrientationType type;
  Promise<void> lock(OrientationLockType orientation);
  void unlock();
};
""",
    "URL": """interface URL {
  constructor(USVString url, optional USVString base);
  attribute USVString href;
  readonly attribute USVString origin;
};

interface URLSearchParams {
  constructor(optional any init);
  USVString? get(USVString name);
  void append(USVString name, USVString value);
};
""",
    "UTL": """interface PerformanceUserTiming {
  void mark(DOMString markName);
  void measure(DOMString measureName, optional DOMString startMark);
  void clearMarks(optional DOMString markName);
};
""",
    "DOM4": """interface ChildNode {
  void remove();
  void before(any... nodes);
  void after(any... nodes);
};

interface ParentNode {
  void prepend(any... nodes);
  void append(any... nodes);
};
""",
    "WEBVTT": """interface VTTCue : TextTrackCue {
  constructor(double startTime, double endTime, DOMString text);
  attribute DOMString text;
};

interface TextTrack : EventTarget {
  void addCue(TextTrackCue cue);
};
""",
    "E": """interface TextEncoder {
  constructor();
  Uint8Array encode(optional USVString input);
};

interface TextDecoder {
  constructor(optional DOMString label);
  USVString decode(optional BufferSource input);
};
""",
    "MSR": """interface MediaRecorder : EventTarget {
  constructor(MediaStream stream);
  void start(optional unsigned long timeslice);
  void stop();
};
""",
    "TE": """interface Touch {
  readonly attribute long identifier;
};

interface TouchEvent : UIEvent {
  readonly attribute TouchList touches;
};
""",
    "PUSH": """interface PushManager {
  Promise<PushSubscription> subscribe(optional PushSubscriptionOptionsInit options);
  Promise<PushSubscription?> getSubscription();
};
""",
    "WSP": """interface SpeechSynthesis : EventTarget {
  void speak(SpeechSynthesisUtterance utterance);
  void cancel();
};

interface SpeechSynthesisUtterance : EventTarget {
  constructor(optional DOMString text);
};
""",
    "WANIM": """interface Animation : EventTarget {
  attribute double playbackRate;
  void play();
  void cancel();
};
""",
    "SD": """interface ShadowRoot : DocumentFragment {
  readonly attribute Element host;
  attribute DOMString innerHTML;
};
""",
    "CLIP": """interface ClipboardEvent : Event {
  readonly attribute DataTransfer? clipboardData;
};
""",
}

# standard_name pattern, js endpoint pattern, native symbol (also the display
# name of the standard's main exclusive implementation function).
CVE_PATTERNS = {
    "WEBGL": ("WebGL", "bufferData", "WebGLContext::BufferData"),
    "H-WW": ("Web Workers", "importScripts", "WorkerPrivate::DoRunLoop"),
    "WRTC": ("WebRTC", "createDataChannel", "PeerConnectionImpl::CreateOffer"),
    "H-C": ("canvas element", "getImageData", "CanvasRenderingContext2D::DrawImage"),
    "SVG": ("SVG", "SVGNumberList", "nsSVGPointList::AppendElement"),
    "WEBA": ("Web Audio", "createAnalyser", "AudioNodeStream::ProduceOutput"),
    "AJAX": ("XMLHttpRequest", "setRequestHeader", "nsXMLHttpRequest::SendAsBinary"),
    "HTML": ("HTML standard", "HTMLFormElement", "HTMLFormElement::SubmitSubmission"),
    "HTML5": ("HTML5", "HTMLMediaElement", "HTMLMediaElement::LoadResource"),
    "SW": ("Service Workers", "getRegistration", "ServiceWorkerManager::Register"),
    "H-WS": ("WebSockets", "WebSocket.send", "WebSocketChannel::ProcessInput"),
    "H-HI": ("History interface", "pushState", "nsHistory::PushOrReplaceState"),
    "IDB": ("IndexedDB", "deleteDatabase", "IDBObjectStore::AddOrPut"),
    "WCR": ("Web Crypto", "getRandomValues", "WebCryptoTask::DispatchWithPromise"),
    "MCS": ("Media Capture", "getUserMedia", "MediaManager::GetUserMedia"),
    "DOM2-H": ("DOM Level 2 HTML", "insertRow", "HTMLTableElement::InsertRow"),
    "DOM2-T": ("DOM Traversal", "TreeWalker", "nsRange::SetStart"),
    "HTML51": ("HTML 5.1", "showModal", "HTMLDialogElement::ShowModal"),
    "RT": ("Resource Timing", "PerformanceResourceTiming", "PerformanceResourceTiming::ResponseEnd"),
    "FULL": ("Fullscreen API", "requestFullscreen", "nsDocument::RequestFullScreen"),
    "BE": ("Beacon API", "sendBeacon", "Navigator::SendBeacon"),
    "DOM1": ("DOM Level 1", "appendChild", "nsINode::ReplaceOrInsertBefore"),
    "DOM-PS": ("DOM Parsing", "parseFromString", "DOMParser::ParseFromString"),
    "DOM2-E": ("DOM Level 2 Events", "dispatchEvent", "EventDispatcher::Dispatch"),
    "DOM2-S": ("DOM Level 2 Style", "setProperty", "nsDOMCSSDeclaration::SetPropertyValue"),
    "F": ("Fetch API", "Request.clone", "FetchDriver::HttpFetch"),
    "CSS-OM": ("CSS Object Model", "insertRule", "CSSStyleSheet::InsertRuleInternal"),
    "DOM": ("DOM Living Standard", "MutationObserver", "nsDOMMutationObserver::HandleMutation"),
    "H-P": ("HTML Plugins", "PluginArray", "nsPluginArray::Refresh"),
    "FA": ("File API", "readAsDataURL", "FileReader::ReadFileContent"),
    "GP": ("Gamepad API", "getGamepads", "GamepadService::NewButtonEvent"),
    "GEO": ("Geolocation", "watchPosition", "nsGeolocationRequest::SendLocation"),
    "HRT": ("High Resolution Time", "performance.now", "Performance::Now"),
    "H-CM": ("Channel Messaging", "MessageChannel", "MessagePort::PostMessageMoz"),
    "NT": ("Navigation Timing", "PerformanceTiming", "nsPerformanceTiming::NavigationStart"),
    "WN": ("Web Notifications", "requestPermission", "Notification::ShowInternal"),
    "PV": ("Page Visibility", "visibilityState", "nsDocument::UpdateVisibilityState"),
    "UIE": ("UI Events", "getModifierState", "UIEvent::GetRangeParent"),
    "V": ("Vibration API", "vibrate", "Navigator::Vibrate"),
}

FUNCTIONALITY = [
    ("drag-and-drop", "HTML"),
    ("drag-and-drop", "HTML"),
    ("session history", "H-HI"),
    ("plugin enumeration", "H-P"),
    ("fullscreen mode", "FULL"),
]

MULTI = [
    ("H-WW", "HRT"), ("SVG", "WEBGL"), ("IDB", "H-WW"), ("WRTC", "MCS"),
    ("WEBGL", "H-C"), ("H-C", "HTML5"), ("AJAX", "F"), ("SW", "F"),
    ("HTML", "DOM2-H"), ("DOM1", "DOM"), ("DOM2-E", "UIE"), ("DOM2-S", "CSS-OM"),
    ("H-WS", "HTML"),
]

ROUTE_SPLIT = {"js_endpoint": 32, "native_symbol": 21}


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def all_standards():
    out = []
    for name, ab, using, brk, agree, cves, hs, eloc, att in MEASURED:
        out.append(dict(name=name, abbrev=ab, using=using, brk=brk, agree=agree,
                        cves=cves, hs=hs, eloc_pct=eloc, attacks=att, measured=True))
    for name, ab, using in QUIET:
        out.append(dict(name=name, abbrev=ab, using=using, brk="0%", agree="100%",
                        cves=0, hs=0, eloc_pct=None, attacks=0, measured=False))
    assert len(out) == 74
    assert len({s["abbrev"] for s in out}) == 74
    return out


# ---------------------------------------------------------------- IDL catalog

IFACE_RE = re.compile(r"^(partial\s+)?interface\s+([A-Za-z_]\w*)", re.M)


def interfaces_of(text):
    return [m.group(2) for m in IFACE_RE.finditer(text)]


def members_of(text):
    """Tiny re-parse of the fixture IDL to derive binding entry points."""
    feats = []
    iface = None
    for line in text.splitlines():
        line = line.strip()
        m = IFACE_RE.match(line)
        if m:
            iface = m.group(2)
            continue
        if not line or line.startswith("}") or line.startswith("["):
            continue
        line = line.rstrip(";")
        if line.startswith("constructor"):
            feats.append((iface, "constructor", "constructor"))
        elif "attribute" in line.split("(")[0]:
            name = line.split()[-1]
            feats.append((iface, name, "attribute_get"))
            if not line.startswith("readonly"):
                feats.append((iface, name, "attribute_set"))
        else:
            name = line.split("(")[0].split()[-1]
            feats.append((iface, name, "method"))
    return feats


def gen_catalog(stds):
    idl_dir = os.path.join(ROOT, "idl")
    os.makedirs(idl_dir, exist_ok=True)
    mapping = []
    features = {}
    for s in stds:
        text = IDL[s["abbrev"]]
        fname = s["abbrev"].lower().replace("-", "_") + ".idl"
        with open(os.path.join(idl_dir, fname), "w") as f:
            f.write(text)
        seen = []
        for i in interfaces_of(text):
            if i not in seen:
                seen.append(i)
                mapping.append((i, s["name"], s["abbrev"]))
        features[s["abbrev"]] = members_of(text)
    ifaces = [m[0] for m in mapping]
    assert len(ifaces) == len(set(ifaces)), "interface names must be unique"
    write_csv(os.path.join(ROOT, "standards.csv"),
              ["interface", "standard_name", "abbreviation"], mapping)
    return features


# ----------------------------------------------------------------- call graph

def eloc_targets(stds):
    lines = {}
    for s in stds:
        if s["measured"]:
            lines[s["abbrev"]] = round(s["eloc_pct"] * TOTAL_ELOC / 100)
    quiet = [s["abbrev"] for s in stds if not s["measured"]]
    cons_fill = CONSERVATIVE_ELOC - sum(lines[a] for a in CONSERVATIVE if a in lines)
    assert quiet[0] == "PT2"
    lines["PT2"] = cons_fill
    aggr_quiet = [a for a in AGGRESSIVE_EXTRA if a in quiet]
    aggr_fill = AGGRESSIVE_ELOC - CONSERVATIVE_ELOC - sum(
        lines[a] for a in AGGRESSIVE_EXTRA if a in lines)
    spread(lines, aggr_quiet, aggr_fill)
    rest = [a for a in quiet if a not in lines]
    spread(lines, rest, TOTAL_ELOC - sum(lines.values()))
    for a in quiet:
        assert 0 < lines[a] < TOTAL_ELOC / 100, (a, lines[a])
    for s in stds:
        if s["measured"]:
            assert round(100 * lines[s["abbrev"]] / TOTAL_ELOC, 2) == s["eloc_pct"], s
    assert sum(lines.values()) == TOTAL_ELOC
    return lines


def spread(lines, abbrevs, total):
    rng = random.Random(total)
    weights = [rng.randint(4, 10) for _ in abbrevs]
    acc = 0
    for i, a in enumerate(abbrevs):
        if i == len(abbrevs) - 1:
            lines[a] = total - acc
        else:
            lines[a] = total * weights[i] // sum(weights)
            acc += lines[a]


def split_loc(rng, total, parts):
    if total == 0:
        return []
    parts = max(1, min(parts, total))
    cuts = sorted(rng.sample(range(1, total), parts - 1)) if parts > 1 else []
    bounds = [0] + cuts + [total]
    return [bounds[i + 1] - bounds[i] for i in range(parts)]


def camel(s):
    return s[0].upper() + s[1:]


def gen_callgraph(stds, features, targets):
    rng = random.Random(20160101)
    nodes = []  # id, display, kind, loc, standard, third_party
    edges = []
    binding_ids = {}
    for s in stds:
        ab = s["abbrev"]
        ids = []
        for iface, member, kind in features[ab]:
            suffix = {"method": "", "attribute_get": "_get", "attribute_set": "_set",
                      "constructor": ""}[kind]
            nid = "b:%s.%s%s" % (iface, member, suffix)
            disp = "mozilla::dom::%sBinding::%s%s" % (
                iface, member if kind != "constructor" else "_constructor",
                {"attribute_get": "_getter", "attribute_set": "_setter"}.get(kind, ""))
            nodes.append((nid, disp, "binding", rng.randint(8, 40), ab, ""))
            ids.append(nid)
        binding_ids[ab] = ids

    # Shared engine helpers: reached from many standards, never exclusive.
    shared = []
    for i, name in enumerate(["nsContentUtils::ThrowErrorMessage", "nsINode::OwnerDoc",
                              "nsGlobalWindow::GetCurrentInnerWindow", "ErrorResult::Throw",
                              "nsCycleCollectionParticipant::Traverse",
                              "nsJSUtils::GetCallingLocation", "nsThreadUtils::Dispatch",
                              "mozilla::dom::Promise::Create", "nsCOMPtr_base::assign_with_AddRef",
                              "JS_WrapValue", "nsIPrincipal::Subsumes",
                              "mozilla::ipc::MessageChannel::Send"]):
        nid = "i:shared%02d" % i
        nodes.append((nid, name, "implementation", rng.randint(15, 220), "", ""))
        shared.append(nid)
    for i in range(len(shared) - 1):
        if rng.random() < 0.5:
            edges.append((shared[i], shared[i + 1]))

    # Core engine roots (never called from script) with their own callees.
    roots = []
    for i, name in enumerate(["nsLayoutUtils::PaintFrame", "PresShell::Paint",
                              "nsDocShell::InternalLoad", "nsHttpChannel::OnStartRequest",
                              "js::RunScript", "XRE_main"]):
        nid = "i:core%02d" % i
        nodes.append((nid, name, "implementation", rng.randint(40, 400), "", ""))
        roots.append(nid)
        edges.append((nid, rng.choice(shared)))

    exclusive = {}
    counter = 0
    for s in stds:
        ab = s["abbrev"]
        pieces = split_loc(rng, targets[ab], rng.randint(2, 7))
        if not binding_ids[ab]:
            raise SystemExit("standard without bindings: " + ab)
        members = []
        stem = re.sub(r"[^A-Za-z0-9]", "", s["name"].title())[:24]
        for j, loc in enumerate(pieces):
            counter += 1
            nid = "i:%05d" % counter
            if j == 0 and ab in CVE_PATTERNS:
                disp = CVE_PATTERNS[ab][2]
            else:
                disp = "mozilla::dom::%sImpl::Step%d" % (stem, j)
            nodes.append((nid, disp, "implementation", loc, "", ""))
            members.append(nid)
        exclusive[ab] = members
        bindings = binding_ids[ab]
        for j, nid in enumerate(members):
            if j == 0 or rng.random() < 0.45:
                # called straight from a binding
                edges.append((rng.choice(bindings), nid))
            else:
                # second-iteration member: only called by earlier exclusive code
                edges.append((members[rng.randrange(j)], nid))
            if rng.random() < 0.6:
                edges.append((nid, rng.choice(shared)))
        if len(members) >= 3 and rng.random() < 0.5:
            edges.append((members[-1], members[1]))  # internal cycle
        if members and rng.random() < 0.2:
            edges.append((members[0], members[0]))
        for b in bindings:
            if rng.random() < 0.3:
                edges.append((b, rng.choice(shared)))
        # A helper also reached from the layout engine: excluded.
        counter += 1
        helper = "i:%05d" % counter
        nodes.append((helper, "mozilla::dom::%sHelper::Convert" % stem, "implementation",
                      rng.randint(5, 120), "", ""))
        edges.append((rng.choice(bindings), helper))
        edges.append((rng.choice(roots), helper))

    # Dead code.
    for i in range(6):
        nodes.append(("i:dead%02d" % i, "nsObsoleteThing::Method%d" % i, "implementation",
                      rng.randint(10, 90), "", ""))

    # Third-party code: WebRTC's private media stack plus a shared image decoder.
    tp = [("t:webrtc_voe", "webrtc::VoiceEngineImpl::Init", 214811),
          ("t:webrtc_vie", "webrtc::ViEChannel::ProcessNACK", 187204),
          ("t:webrtc_srtp", "srtp_protect", 112457),
          ("t:libjpeg", "jpeg_read_scanlines", 31877)]
    for nid, disp, loc in tp:
        nodes.append((nid, disp, "implementation", loc, "", "true"))
    wr = exclusive["WRTC"]
    edges.append((wr[0], "t:webrtc_voe"))
    edges.append(("t:webrtc_voe", "t:webrtc_vie"))
    edges.append(("t:webrtc_vie", "t:webrtc_srtp"))
    edges.append((exclusive["H-C"][0], "t:libjpeg"))
    edges.append((roots[0], "t:libjpeg"))

    edges = sorted(set(edges))
    check_exclusive(nodes, edges, targets, exclusive)
    write_csv(os.path.join(ROOT, "callgraph", "nodes.csv"),
              ["id", "display_name", "kind", "loc", "standard", "third_party"], nodes)
    write_csv(os.path.join(ROOT, "callgraph", "edges.csv"), ["caller_id", "callee_id"], edges)
    return exclusive


def check_exclusive(nodes, edges, targets, expected):
    kind = {n[0]: n[2] for n in nodes}
    loc = {n[0]: n[3] for n in nodes}
    tp = {n[0]: n[5] == "true" for n in nodes}
    std = {n[0]: n[4] for n in nodes}
    callers, callees = {}, {}
    for a, b in edges:
        callers.setdefault(b, set()).add(a)
        callees.setdefault(a, set()).add(b)
    for ab, target in targets.items():
        binds = {n for n in kind if kind[n] == "binding" and std[n] == ab}
        reach, stack = set(), list(binds)
        while stack:
            n = stack.pop()
            for c in callees.get(n, ()):
                if kind[c] == "implementation" and c not in reach:
                    reach.add(c)
                    stack.append(c)
        changed = True
        while changed:
            changed = False
            for r in list(reach):
                if any(c != r and c not in reach and c not in binds for c in callers.get(r, ())):
                    reach.discard(r)
                    changed = True
        got = sum(loc[n] for n in reach if not tp[n])
        assert got == target, (ab, got, target)
        assert {n for n in reach if not tp[n]} == set(expected[ab]), ab


def gen_battery():
    nodes = [
        ("B_charging", "BatteryManagerBinding::get_charging", "binding", 12, "BA", "false"),
        ("B_chargingTime", "BatteryManagerBinding::get_chargingTime", "binding", 12, "BA", "false"),
        ("B_dischargingTime", "BatteryManagerBinding::get_dischargingTime", "binding", 12, "BA", "false"),
        ("I_charging", "BatteryManager::Charging", "implementation", 10, "", "false"),
        ("I_chargingTime", "BatteryManager::ChargingTime", "implementation", 20, "", "false"),
        ("I_dischargingTime", "BatteryManager::DischargingTime", "implementation", 30, "", "false"),
        ("I_shared", "hal::GetCurrentBatteryInformation", "implementation", 40, "", "false"),
        ("X_otherBinding", "GeolocationBinding::getCurrentPosition", "binding", 12, "GEO", "false"),
    ]
    edges = [
        ("B_charging", "I_charging"),
        ("B_dischargingTime", "I_dischargingTime"),
        ("B_chargingTime", "I_chargingTime"),
        ("I_charging", "I_chargingTime"),
        ("I_charging", "I_shared"),
        ("X_otherBinding", "I_shared"),
    ]
    write_csv(os.path.join(ROOT, "battery", "nodes.csv"),
              ["id", "display_name", "kind", "loc", "standard", "third_party"], nodes)
    write_csv(os.path.join(ROOT, "battery", "edges.csv"), ["caller_id", "callee_id"], edges)
    write_csv(os.path.join(ROOT, "battery", "standards.csv"),
              ["interface", "standard_name", "abbreviation"],
              [("BatteryManager", "Battery Status API", "BA"),
               ("Geolocation", "Geolocation API", "GEO")])
    with open(os.path.join(ROOT, "battery", "battery.idl"), "w") as f:
        f.write("interface BatteryManager {\n"
                "  readonly attribute boolean charging;\n"
                "  readonly attribute unrestricted double chargingTime;\n"
                "  readonly attribute unrestricted double dischargingTime;\n"
                "};\n\n"
                "interface Geolocation {\n"
                "  void getCurrentPosition(PositionCallback successCallback);\n"
                "};\n")


# ------------------------------------------------------------------------ CVEs

def gen_cves(stds):
    rng = random.Random(1554)
    info = {s["abbrev"]: s for s in stds}
    need = {s["abbrev"]: [s["cves"], s["hs"]] for s in stds if s["cves"]}
    assert len(need) == 39
    records = []  # (targets, route, high)
    for a, b in MULTI:
        na, nb = need[a], need[b]
        if na[1] > 0 and nb[1] > 0:
            high = True
        else:
            assert na[0] - na[1] > 0 and nb[0] - nb[1] > 0, (a, b)
            high = False
        for n in (na, nb):
            n[0] -= 1
            n[1] -= int(high)
        records.append(((a, b), "standard_name", high))
    functionality = list(FUNCTIONALITY)
    singles = []
    for ab in sorted(need, key=lambda a: (-info[a]["cves"], a)):
        c, h = need[ab]
        assert 0 <= h <= c
        for i in range(c):
            singles.append([ab, i < h])
    # functionality-keyword CVEs first, then round-robin the remaining routes
    routes = {}
    for kw, ab in functionality:
        idx = next(i for i, s in enumerate(singles) if s[0] == ab and i not in routes)
        routes[idx] = ("functionality_keyword", kw)
    pending = [i for i in range(len(singles)) if i not in routes]
    rng.shuffle(pending)
    split = []
    for route, n in ROUTE_SPLIT.items():
        split += [route] * n
    split += ["standard_name"] * (len(pending) - len(split))
    for i, r in zip(pending, split):
        routes[i] = (r, None)
    for i, (ab, high) in enumerate(singles):
        route, kw = routes[i]
        records.append(((ab,), route if kw is None else (route, kw), high))

    years = list(range(2010, 2017))
    out = []
    seq = 5000
    for targets, route, high in records:
        seq += rng.randint(1, 17)
        year = rng.choice(years)
        if high:
            sev = rng.choice(["high", "high", "severe"])
        else:
            sev = rng.choice(["low", "moderate", "moderate"])
        out.append({"id": "CVE-%d-%d" % (year, seq), "description": describe(rng, targets, route),
                    "severity": sev, "product_hint": "Firefox"})
    # the two worked examples from the SVG discussion
    out.append({"id": "CVE-2011-2363",
                "description": "Use-after-free vulnerability in the nsSVGPointList::AppendElement "
                               "function in the SVG implementation in Mozilla Firefox before 3.6.18 "
                               "allows remote attackers to execute arbitrary code via vectors involving "
                               "a DOM modification listener that removes items from SVG animations.",
                "severity": "severe", "product_hint": "Firefox"})
    out.append({"id": "CVE-2015-0818",
                "description": "Privilege escalation vulnerability in the SVG handling of Mozilla Firefox "
                               "before 36.0.4 allows remote attackers to bypass the Same Origin Policy "
                               "and execute arbitrary JavaScript code with chrome privileges via vectors "
                               "involving hash navigation.",
                "severity": "high", "product_hint": "Firefox"})
    # fix up: the SVG example above consumes one SVG severe CVE; drop one generated SVG single
    drop = next(i for i, (t, r, h) in enumerate(records) if t == ("SVG",) and h and r == "standard_name")
    del out[drop]

    engine = ["layout engine", "JavaScript engine", "JIT compiler", "network cache",
              "font shaping library", "image decoder", "garbage collector", "sandbox broker",
              "update service", "certificate verifier"]
    for i in range(60):
        seq += rng.randint(1, 17)
        year = rng.choice(years)
        part = engine[i % len(engine)]
        out.append({"id": "CVE-%d-%d" % (year, seq),
                    "description": "%s in the %s in Mozilla Firefox before %d.0 allows remote "
                                   "attackers to cause a denial of service or possibly execute "
                                   "arbitrary code via a crafted web site." % (
                                       rng.choice(["Heap-based buffer overflow", "Use-after-free vulnerability",
                                                   "Integer overflow", "Memory corruption"]),
                                       part, rng.randint(4, 44)),
                    "severity": rng.choice(["low", "moderate", "high", "severe"]),
                    "product_hint": "Firefox"})
    for i in range(14):
        seq += rng.randint(1, 17)
        year = rng.choice(years)
        out.append({"id": "CVE-%d-%d" % (year, seq),
                    "description": "Adobe Flash Player before 11.2.202.236 allows remote attackers "
                                   "to execute arbitrary code via a crafted SWF file loaded in Firefox.",
                    "severity": "severe", "product_hint": "Adobe Flash Player"})
    for i in range(4):
        seq += rng.randint(1, 17)
        out.append({"id": "CVE-2013-%d" % seq,
                    "description": "Cross-site scripting vulnerability in a WordPress plugin, "
                                   "exploitable through Firefox.",
                    "severity": "moderate", "product_hint": "WordPress"})
    for i in range(5):
        seq += rng.randint(1, 17)
        out.append({"id": "CVE-2009-%d" % seq,
                    "description": "Use-after-free vulnerability in the WebGL implementation in "
                                   "Mozilla Firefox 3.5 allows remote attackers to execute arbitrary code.",
                    "severity": "high", "product_hint": "Firefox"})
    rng.shuffle(out)
    ids = [r["id"] for r in out]
    assert len(ids) == len(set(ids))
    os.makedirs(os.path.join(ROOT, "cves"), exist_ok=True)
    with open(os.path.join(ROOT, "cves", "cves.jsonl"), "w") as f:
        for r in out:
            f.write(json.dumps(r, sort_keys=False) + "\n")

    rules = []
    for ab, (name, js, native) in CVE_PATTERNS.items():
        rules.append(("standard_name", name, ab, "false"))
        rules.append(("js_endpoint", js, ab, "false"))
        rules.append(("native_symbol", native, ab, "false"))
    seen = set()
    for kw, ab in FUNCTIONALITY:
        if (kw, ab) not in seen:
            seen.add((kw, ab))
            rules.append(("functionality_keyword", kw, ab, "false"))
    rules.append(("standard_name", "SVG handling", "SVG", "true"))
    write_csv(os.path.join(ROOT, "cves", "rules.csv"),
              ["route", "pattern", "target_abbrev", "negate"], rules)
    with open(os.path.join(ROOT, "cves", "discard.txt"), "w") as f:
        f.write("# one keyword per line; matched case-insensitively against description and product_hint\n")
        for kw in ["Adobe Flash Player", "Java Runtime Environment", "Adobe Reader",
                   "QuickTime", "Silverlight", "WordPress"]:
            f.write(kw + "\n")
    check_attribution(out, rules)


WORD = re.compile(r"\w")


def rule_regex(p):
    pre = r"\b" if WORD.match(p[0]) else ""
    post = r"\b" if WORD.match(p[-1]) else ""
    return re.compile(pre + re.escape(p) + post, re.I)


def check_attribution(records, rules):
    compiled = [(r, rule_regex(r[1])) for r in rules]
    counts = {}
    dedup = 0
    for rec in records:
        if rec["product_hint"] != "Firefox" or int(rec["id"].split("-")[1]) < 2010:
            continue
        pos, neg = set(), set()
        for (route, pat, ab, negate), rx in compiled:
            if rx.search(rec["description"]):
                (neg if negate == "true" else pos).add(ab)
        hit = pos - neg
        if hit:
            dedup += 1
        for ab in hit:
            c = counts.setdefault(ab, [0, 0])
            c[0] += 1
            c[1] += rec["severity"] in ("high", "severe")
    for s in all_standards():
        if s["cves"]:
            assert counts.get(s["abbrev"]) == [s["cves"], s["hs"]], (s["abbrev"], counts.get(s["abbrev"]))
    assert dedup == 175, dedup


def describe(rng, targets, route):
    ver = rng.randint(4, 44)
    if len(targets) == 2:
        a, b = (CVE_PATTERNS[t][0] for t in targets)
        return ("Use-after-free vulnerability in the interaction between the %s and %s "
                "implementations in Mozilla Firefox before %d.0 allows remote attackers to "
                "execute arbitrary code via crafted content." % (a, b, ver))
    ab = targets[0]
    name, js, native = CVE_PATTERNS[ab]
    flaw = rng.choice(["Use-after-free vulnerability", "Heap-based buffer overflow",
                       "Out-of-bounds read", "Integer overflow", "Race condition"])
    if isinstance(route, tuple):
        return ("Mozilla Firefox before %d.0 mishandles %s, which allows remote attackers to "
                "obtain sensitive information or cause a denial of service." % (ver, route[1]))
    if route == "standard_name":
        return ("%s in the %s implementation in Mozilla Firefox before %d.0 allows remote "
                "attackers to execute arbitrary code via crafted content." % (flaw, name, ver))
    if route == "js_endpoint":
        return ("The %s method in Mozilla Firefox before %d.0 does not properly validate its "
                "arguments, which allows remote attackers to cause a denial of service "
                "(memory corruption)." % (js, ver))
    return ("%s in the %s function in Mozilla Firefox before %d.0 allows remote attackers to "
            "execute arbitrary code via unspecified vectors." % (flaw, native, ver))


# --------------------------------------------------------------------- benefit

def break_ok(cell, w):
    if cell == "0%":
        return w == 0
    if cell == "<1%":
        return 0 < w < 0.005
    n = int(cell.rstrip("%"))
    return round(w * 100 + 1e-12) == n


def gen_benefit(stds):
    rng = random.Random(1684)
    plan = []
    for s in stds:
        using = s["using"]
        if using == 0:
            continue
        n = min(40, using)
        share = using / POPULATION
        choice = None
        for nn in sorted(range(max(1, n - 12), n + 13), key=lambda x: (abs(x - n), x)):
            if nn > using:
                continue
            for k in range(nn + 1):
                if break_ok(s["brk"], k / nn * share):
                    choice = (nn, k)
                    break
            if choice:
                break
        assert choice, s["abbrev"]
        plan.append((s, choice[0], choice[1]))
    # DOM1 is pinned so its raw fraction is 29/42
    plan = [(s, 42, 29) if s["abbrev"] == "DOM1" else (s, n, k) for s, n, k in plan]
    for s, n, k in plan:
        assert break_ok(s["brk"], k / n * s["using"] / POPULATION), s["abbrev"]
    total = sum(n for _, n, _ in plan)
    want_disagree = round(total * (1 - 0.9674))
    # distribute disagreements by the per-standard agreement column
    disagree = {}
    for s, n, k in plan:
        a = s["agree"]
        frac = 1 - (float(a.rstrip("%")) / 100 if a.endswith("%") else 1.0)
        disagree[s["abbrev"]] = min(n - k, round(frac * n))
    diff = want_disagree - sum(disagree.values())
    order = sorted(plan, key=lambda p: -p[1])
    i = 0
    while diff != 0:
        s, n, k = order[i % len(order)]
        ab = s["abbrev"]
        if diff > 0 and disagree[ab] < n - k:
            disagree[ab] += 1
            diff -= 1
        elif diff < 0 and disagree[ab] > 0:
            disagree[ab] -= 1
            diff += 1
        i += 1
    rows = []
    for s, n, k in plan:
        ab = s["abbrev"]
        sites = rng.sample(range(1, POPULATION + 1), n)
        d = disagree[ab]
        for j, site in enumerate(sites):
            host = "site%05d.example" % site
            if j < k:
                pair = (3, 3)
            elif j < k + d:
                pair = rng.choice([(1, 2), (2, 1), (2, 3), (3, 2)])
            else:
                pair = rng.choice([(1, 1), (1, 1), (1, 1), (2, 2)])
            rows.append((host, ab, "tester_a", pair[0]))
            rows.append((host, ab, "tester_b", pair[1]))
    agree = 1 - want_disagree / total
    assert abs(agree - 0.9674) <= 0.0005, agree
    write_csv(os.path.join(ROOT, "benefit", "site_tests.csv"),
              ["site", "standard_abbrev", "tester", "score"], rows)
    write_csv(os.path.join(ROOT, "benefit", "usage.csv"),
              ["standard_abbrev", "sites_using", "population"],
              [(s["abbrev"], s["using"], POPULATION) for s in stds])
    print("paired tests:", total, "agreement:", agree)


def main():
    stds = all_standards()
    features = gen_catalog(stds)
    targets = eloc_targets(stds)
    gen_callgraph(stds, features, targets)
    gen_battery()
    gen_cves(stds)
    gen_benefit(stds)
    write_csv(os.path.join(ROOT, "attacks.csv"), ["standard_abbrev", "attack_papers"],
              [(s["abbrev"], s["attacks"]) for s in stds])
    write_csv(os.path.join(ROOT, "summary.csv"),
              ["standard_name", "abbreviation", "alexa_using", "site_break_rate", "agreement",
               "cves", "high_or_severe", "eloc_pct", "attack_papers"],
              [(s["name"], s["abbrev"], s["using"], s["brk"], s["agree"], s["cves"], s["hs"],
                "%.2f" % s["eloc_pct"] if s["measured"] else "", s["attacks"]) for s in stds])
    cons = sum(targets[a] for a in CONSERVATIVE)
    aggr = sum(targets[a] for a in AGGRESSIVE)
    print("eloc conservative", cons, cons / TOTAL_ELOC, "aggressive", aggr, aggr / TOTAL_ELOC)


if __name__ == "__main__":
    main()
